"""Multilayer perceptron with analytic backpropagation and momentum SGD.

Hidden layers use ReLU, the output layer softmax, and training minimises the
batch-mean categorical cross-entropy. All functions are pure: they never
mutate their inputs and return fresh arrays, so parameter snapshots can be
shared read-only between client threads.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from fedflip.errors import (
    DatasetInvariantError,
    InvalidConfigError,
    MissingFileError,
    ShapeMismatchError,
)
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)

DTYPE = np.float64
LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class MlpConfig:
    """Network shape: input -> hidden dims (ReLU) -> num_classes (softmax)."""
    input_dim: int = 784
    hidden_dims: Tuple[int, ...] = (200, 200, 200)
    num_classes: int = 7

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim <= 0:
            raise InvalidConfigError(f"input_dim must be positive, got {self.input_dim}")
        if any(h <= 0 for h in self.hidden_dims):
            raise InvalidConfigError(f"hidden dims must be positive, got {list(self.hidden_dims)}")
        if self.num_classes < 2:
            raise InvalidConfigError(f"num_classes must be at least 2, got {self.num_classes}")

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_dims, self.num_classes]
        return list(zip(dims[:-1], dims[1:]))


class Layer(NamedTuple):
    weights: np.ndarray  # [fan_in, fan_out]
    biases: np.ndarray   # [fan_out]


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Ordered dense layers of the network."""
    layers: Tuple[Layer, ...]

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[0]

    @property
    def num_classes(self) -> int:
        return self.layers[-1].weights.shape[1]

    @property
    def shapes(self) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        return [(layer.weights.shape, layer.biases.shape) for layer in self.layers]

    def arrays(self) -> List[np.ndarray]:
        """Weights and biases interleaved: w0, b0, w1, b1, ..."""
        return [array for layer in self.layers for array in layer]

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> "ModelParams":
        return cls(tuple(Layer(arrays[i], arrays[i + 1]) for i in range(0, len(arrays), 2)))

    def copy(self) -> "ModelParams":
        return type(self).from_arrays([a.copy() for a in self.arrays()])

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())

    def check_compatible(self, other: "ModelParams", what: str = "parameters") -> None:
        if self.shapes != other.shapes:
            raise ShapeMismatchError(what, self.shapes, other.shapes)


class Gradients(ModelParams):
    """Loss gradient, shape-identical to the parameters it differentiates."""


@dataclass(frozen=True, eq=False)
class OptimizerState:
    velocity: ModelParams
    learning_rate: float = 0.01
    momentum: float = 0.9

    def __post_init__(self):
        if self.learning_rate < 0:
            raise InvalidConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise InvalidConfigError(f"momentum must be in [0, 1), got {self.momentum}")

    @classmethod
    def zeros_like(
        cls, params: ModelParams, learning_rate: float = 0.01, momentum: float = 0.9
    ) -> "OptimizerState":
        velocity = ModelParams.from_arrays([np.zeros_like(a) for a in params.arrays()])
        return cls(velocity=velocity, learning_rate=learning_rate, momentum=momentum)


@dataclass(frozen=True, eq=False)
class Batch:
    features: np.ndarray  # [b, input_dim], values in [0, 1]
    labels: Optional[np.ndarray] = None  # [b] class indices; None for inference

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ShapeMismatchError("batch features", "2-d matrix", self.features.shape)
        if self.features.shape[0] < 1:
            raise ShapeMismatchError("batch size", ">= 1 row", 0)
        if self.labels is not None and len(self.labels) != self.features.shape[0]:
            raise ShapeMismatchError("batch labels", self.features.shape[0], len(self.labels))
        if self.labels is not None and (np.asarray(self.labels) < 0).any():
            raise DatasetInvariantError(
                f"batch labels must be non-negative, got {int(np.min(self.labels))}"
            )

    def __len__(self) -> int:
        return self.features.shape[0]


def init_params(config: MlpConfig, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out in config.layer_shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(DTYPE)
        layers.append(Layer(weights, np.zeros(fan_out, dtype=DTYPE)))
    return ModelParams(tuple(layers))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _check_width(params: ModelParams, features: np.ndarray) -> None:
    if features.ndim != 2 or features.shape[1] != params.input_dim:
        actual = features.shape[1] if features.ndim == 2 else features.shape
        raise ShapeMismatchError("feature width", params.input_dim, actual)


def _forward_cache(params: ModelParams, features: np.ndarray):
    """Returns (layer inputs, pre-activations, output probabilities)."""
    _check_width(params, features)
    inputs, pre_acts = [], []
    activation = np.asarray(features, dtype=DTYPE)
    for index, layer in enumerate(params.layers):
        inputs.append(activation)
        z = activation @ layer.weights + layer.biases
        pre_acts.append(z)
        if index < len(params.layers) - 1:
            activation = np.maximum(z, 0.0)
    return inputs, pre_acts, softmax(pre_acts[-1])


def forward(params: ModelParams, batch: Batch) -> np.ndarray:
    """Class probabilities, one row per example."""
    return _forward_cache(params, batch.features)[2]


def loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean categorical cross-entropy, probabilities clamped at 1e-12."""
    labels = np.asarray(labels)
    if probs.shape[0] != labels.shape[0]:
        raise ShapeMismatchError("label count", probs.shape[0], labels.shape[0])
    if labels.size and (labels.min() < 0 or labels.max() >= probs.shape[1]):
        raise DatasetInvariantError(
            f"labels must lie in [0, {probs.shape[1]}), got {int(labels.min())}..{int(labels.max())}"
        )
    picked = probs[np.arange(labels.shape[0]), labels]
    return float(np.mean(-np.log(np.maximum(picked, LOG_CLAMP))))


def backward(params: ModelParams, batch: Batch) -> Tuple[float, Gradients]:
    """Batch loss and its analytic gradient (averaged over the batch)."""
    if batch.labels is None:
        raise ShapeMismatchError("batch labels", len(batch), None)
    inputs, pre_acts, probs = _forward_cache(params, batch.features)
    size = len(batch)
    batch_loss = loss(probs, batch.labels)

    # d(mean CE)/d(logits) for softmax output
    delta = probs.copy()
    delta[np.arange(size), batch.labels] -= 1.0
    delta /= size

    layer_grads: List[Layer] = []
    for index in range(len(params.layers) - 1, -1, -1):
        layer_grads.append(Layer(inputs[index].T @ delta, delta.sum(axis=0)))
        if index > 0:
            delta = (delta @ params.layers[index].weights.T) * (pre_acts[index - 1] > 0)

    return batch_loss, Gradients(tuple(reversed(layer_grads)))


def sgd_step(
    params: ModelParams, grads: Gradients, state: OptimizerState
) -> Tuple[ModelParams, OptimizerState]:
    """Classical momentum: v <- mu*v - lr*g; theta <- theta + v."""
    params.check_compatible(grads, "gradient shape")
    params.check_compatible(state.velocity, "velocity shape")

    new_velocity, new_params = [], []
    for theta, grad, vel in zip(params.arrays(), grads.arrays(), state.velocity.arrays()):
        v = state.momentum * vel - state.learning_rate * grad
        new_velocity.append(v)
        new_params.append(theta + v)

    next_state = OptimizerState(
        velocity=ModelParams.from_arrays(new_velocity),
        learning_rate=state.learning_rate,
        momentum=state.momentum,
    )
    return ModelParams.from_arrays(new_params), next_state


def predict(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Most probable class per row; ties go to the lowest class index."""
    probs = _forward_cache(params, np.asarray(features, dtype=DTYPE))[2]
    return np.argmax(probs, axis=1)


def save_params(params: ModelParams, directory: Path) -> List[Path]:
    """Write one ``.npy`` file per array (w0.npy, b0.npy, ...)."""
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for index, layer in enumerate(params.layers):
        for prefix, array in (("w", layer.weights), ("b", layer.biases)):
            path = directory / f"{prefix}{index}.npy"
            np.save(path, array, allow_pickle=False)
            written.append(path)
    logger.debug(f"Saved {len(params.layers)} layers to {directory}")
    return written


def load_params(directory: Path) -> ModelParams:
    """Read a checkpoint written by :func:`save_params`."""
    layers = []
    index = 0
    while (directory / f"w{index}.npy").exists():
        weights = np.load(directory / f"w{index}.npy", allow_pickle=False)
        bias_path = directory / f"b{index}.npy"
        if not bias_path.exists():
            raise MissingFileError(str(bias_path))
        layers.append(Layer(weights.astype(DTYPE), np.load(bias_path, allow_pickle=False).astype(DTYPE)))
        index += 1
    if not layers:
        raise MissingFileError(str(directory / "w0.npy"))

    params = ModelParams(tuple(layers))
    for (w_prev, _), (w_next, _) in zip(params.shapes, params.shapes[1:]):
        if w_prev[1] != w_next[0]:
            raise ShapeMismatchError("checkpoint layer chain", w_prev, w_next)
    return params
