"""In-memory dataset types."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from fedflip.errors import DatasetInvariantError

NUM_CLASSES = 7
IMAGE_PIXELS = 784  # 28 x 28 greyscale

# Label encoding of the public 28x28 greyscale HAM10000 CSV.
CLASS_NAMES: Tuple[str, ...] = ("akiec", "bcc", "bkl", "df", "nv", "vasc", "mel")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Pixel rows scaled to [0, 1] with one class index per row."""
    features: np.ndarray  # [n, n_features] float64
    labels: np.ndarray    # [n] int64
    class_names: Tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "class_names", tuple(self.class_names))

        if features.ndim != 2:
            raise DatasetInvariantError(f"features must be a matrix, got shape {features.shape}")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DatasetInvariantError(
                f"{features.shape[0]} feature rows but labels have shape {labels.shape}"
            )
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise DatasetInvariantError(f"labels must be integers, got {labels.dtype}")
        object.__setattr__(self, "labels", labels.astype(np.int64))

        if features.size and (not np.isfinite(features).all()
                              or features.min() < 0.0 or features.max() > 1.0):
            raise DatasetInvariantError("feature values must be finite and within [0, 1]")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise DatasetInvariantError(
                f"labels must lie in 0..{self.num_classes - 1}, "
                f"got range {labels.min()}..{labels.max()}"
            )

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        """Rows at ``indices``, in that order."""
        return LabeledDataset(self.features[indices], self.labels[indices], self.class_names)

    def with_labels(self, labels: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(self.features, labels, self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


@dataclass(frozen=True, eq=False)
class ClientShard:
    """One hospital's private training data."""
    client_id: int
    data: LabeledDataset

    def __post_init__(self):
        if len(self.data) == 0:
            raise DatasetInvariantError(f"shard for client {self.client_id} is empty")

    def __len__(self) -> int:
        return len(self.data)
