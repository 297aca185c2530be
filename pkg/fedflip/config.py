"""Configuration management for the federated label-flipping simulator.

Two layers:

* ``Settings``: process-level knobs read from ``FEDFLIP_*`` environment
  variables (or ``.env``): worker threads and logging.
* ``ExperimentConfig``: one experiment, read from a flat ``key=value`` file
  by :func:`parse_config`. Unspecified keys fall back to the hyperparameters
  of the reference setup (lr 0.01, momentum 0.9, batch 32, 100 rounds,
  10 clients).
"""

import os
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from fedflip.core.adversary import AttackSpec
from fedflip.core.nn import MlpConfig
from fedflip.errors import ConflictingKeysError, InvalidConfigError, MissingConfigError, UnknownKeyError
from fedflip.ingest.dataset import IMAGE_PIXELS, NUM_CLASSES
from fedflip.ingest.synth import SynthSpec
from fedflip.utils.paths import resolve_relative

DEFAULT_SWEEP = [float(p) for p in range(2, 21, 2)]


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="FEDFLIP_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    threads: int = Field(
        default_factory=lambda: os.cpu_count() or 1,
        ge=1,
        description="Maximum worker threads for clients and sweep cells",
    )
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[Path] = Field(default=None, description="Optional rotating log file")


class HyperParams(BaseModel):
    """Training hyperparameters shared by federated and centralized runs."""

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=0.01, ge=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    batch_size: int = Field(default=32, ge=1)
    comm_rounds: int = Field(default=100, ge=1)
    n_clients: int = Field(default=10, ge=1)
    local_epochs: int = Field(default=1, ge=1)
    num_classes: int = Field(default=NUM_CLASSES, ge=2)
    input_dim: int = Field(default=IMAGE_PIXELS, ge=1)
    hidden_dims: Tuple[int, ...] = Field(default=(200, 200, 200))

    @field_validator("hidden_dims")
    @classmethod
    def hidden_dims_positive(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(h <= 0 for h in v):
            raise ValueError(f"hidden dims must be positive, got {list(v)}")
        return v

    def mlp_config(self) -> MlpConfig:
        return MlpConfig(self.input_dim, self.hidden_dims, self.num_classes)


class Mode(str, Enum):
    FEDERATED = "federated"
    CENTRALIZED = "centralized"
    BOTH = "both"

    @property
    def runs_federated(self) -> bool:
        return self in (Mode.FEDERATED, Mode.BOTH)

    @property
    def runs_centralized(self) -> bool:
        return self in (Mode.CENTRALIZED, Mode.BOTH)


class ExperimentConfig(BaseModel):
    """Everything one ``fedflip run``/``sweep`` invocation needs."""

    model_config = ConfigDict(frozen=True)

    data_source: Union[Path, SynthSpec] = Field(default_factory=SynthSpec)
    hyper: HyperParams = Field(default_factory=HyperParams)
    mode: Mode = Mode.FEDERATED
    attack: Optional[AttackSpec] = None
    sweep: Optional[List[float]] = None
    seeds: List[int] = Field(default_factory=lambda: [42], min_length=1)
    output_dir: Path = Path("./results")
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    init_params: Optional[Path] = None
    report_labels: str = Field(default="index", pattern="^(index|name)$")

    @field_validator("sweep")
    @classmethod
    def sweep_in_range(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None:
            if not v:
                raise ValueError("sweep needs at least one percentage")
            bad = [p for p in v if not 0 <= p <= 100]
            if bad:
                raise ValueError(f"sweep percentages must be in [0, 100], got {bad}")
        return v

    @field_validator("seeds")
    @classmethod
    def seeds_non_negative(cls, v: List[int]) -> List[int]:
        if any(s < 0 for s in v):
            raise ValueError(f"seeds must be non-negative, got {v}")
        return v

    @model_validator(mode="after")
    def attack_fits_federation(self) -> "ExperimentConfig":
        if self.attack is not None and self.attack.malicious_client >= self.hyper.n_clients:
            raise ValueError(
                f"malicious_client {self.attack.malicious_client} "
                f"must be below num_clients {self.hyper.n_clients}"
            )
        if isinstance(self.data_source, SynthSpec) and self.data_source.n_features != self.hyper.input_dim:
            raise ValueError(
                f"synth_features {self.data_source.n_features} "
                f"must equal the model input_dim {self.hyper.input_dim}"
            )
        return self

    @property
    def sweep_percentages(self) -> List[float]:
        return list(self.sweep) if self.sweep is not None else list(DEFAULT_SWEEP)


def _floats(value: str) -> List[float]:
    return [float(part) for part in value.split(",") if part.strip()]


def _ints(value: str) -> List[int]:
    return [int(part) for part in value.split(",") if part.strip()]


def _normalized(weights: List[float]) -> List[float]:
    """Scale class weights (or raw class counts) to sum to one."""
    total = sum(weights)
    return [w / total for w in weights] if total > 0 else weights


# key -> (section, field name, converter)
_KEYS: Dict[str, Tuple[str, str, Callable[[str], object]]] = {
    "learning_rate": ("hyper", "learning_rate", float),
    "momentum": ("hyper", "momentum", float),
    "batch_size": ("hyper", "batch_size", int),
    "comm_rounds": ("hyper", "comm_rounds", int),
    "num_clients": ("hyper", "n_clients", int),
    "local_epochs": ("hyper", "local_epochs", int),
    "hidden_dims": ("hyper", "hidden_dims", lambda v: tuple(_ints(v))),
    "flip_percent": ("attack", "flip_percent", float),
    "malicious_client": ("attack", "malicious_client", int),
    "attack_seed": ("attack", "seed", int),
    "synth_samples": ("synth", "n_samples", int),
    "synth_spread": ("synth", "cluster_spread", float),
    "synth_features": ("synth", "n_features", int),
    "synth_weights": ("synth", "class_weights", _floats),
    "sweep": ("top", "sweep", _floats),
    "seeds": ("top", "seeds", _ints),
    "mode": ("top", "mode", lambda v: v.strip().lower()),
    "data": ("top", "data", str.strip),
    "output_dir": ("top", "output_dir", str.strip),
    "test_fraction": ("top", "test_fraction", float),
    "init_params": ("top", "init_params", str.strip),
    "report_labels": ("top", "report_labels", lambda v: v.strip().lower()),
}


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read a flat ``key=value`` experiment file."""
    path = Path(path)
    if not path.is_file():
        raise MissingConfigError(str(path))

    raw = dotenv_values(path)
    sections: Dict[str, Dict[str, object]] = {"hyper": {}, "attack": {}, "synth": {}, "top": {}}
    for key, value in raw.items():
        normalized = key.strip().lower()
        if normalized not in _KEYS:
            raise UnknownKeyError(key, str(path))
        section, name, convert = _KEYS[normalized]
        if value is None or not value.strip():
            raise InvalidConfigError(f"Configuration key '{key}' has no value", key=key)
        try:
            sections[section][name] = convert(value)
        except ValueError:
            raise InvalidConfigError(
                f"Cannot parse value {value!r} for configuration key '{key}'", key=key
            )

    top = sections["top"]
    if "sweep" in top and "flip_percent" in sections["attack"]:
        raise ConflictingKeysError("sweep", "flip_percent")

    # synthetic rows feed the network directly, so their width fixes input_dim
    if "n_features" in sections["synth"]:
        sections["hyper"]["input_dim"] = sections["synth"]["n_features"]

    base_dir = path.parent
    fields: Dict[str, object] = {}
    try:
        fields["hyper"] = HyperParams(**sections["hyper"])
        data = top.pop("data", "synth")
        if data == "synth":
            synth = dict(sections["synth"])
            if "class_weights" in synth:
                synth["class_weights"] = _normalized(synth["class_weights"])
            synth.setdefault("n_features", fields["hyper"].input_dim)
            fields["data_source"] = SynthSpec(**synth)
        else:
            if sections["synth"]:
                raise ConflictingKeysError("data", next(iter(sections["synth"])))
            fields["data_source"] = resolve_relative(data, base_dir)

        if sections["attack"]:
            # during a sweep only malicious_client/attack_seed are read from here
            fields["attack"] = AttackSpec(**sections["attack"])
        for key in ("output_dir", "init_params"):
            if key in top:
                top[key] = resolve_relative(top[key], base_dir)
        fields.update(top)
        return ExperimentConfig(**fields)
    except ValidationError as e:
        raise InvalidConfigError(_describe(e, path), path=str(path)) from e


_SYNTH_KEYS: Dict[str, Tuple[str, Callable[[str], object]]] = {
    "n_samples": ("n_samples", int),
    "class_weights": ("class_weights", _floats),
    "cluster_spread": ("cluster_spread", float),
    "n_features": ("n_features", int),
    "seed": ("seed", int),
}


def parse_synth_spec(path: Union[str, Path]) -> Tuple[SynthSpec, int]:
    """Read a synthetic-data spec file; returns the spec and its seed (default 0)."""
    path = Path(path)
    if not path.is_file():
        raise MissingConfigError(str(path))

    values: Dict[str, object] = {}
    for key, value in dotenv_values(path).items():
        normalized = key.strip().lower()
        if normalized not in _SYNTH_KEYS:
            raise UnknownKeyError(key, str(path))
        name, convert = _SYNTH_KEYS[normalized]
        try:
            values[name] = convert(value or "")
        except ValueError:
            raise InvalidConfigError(
                f"Cannot parse value {value!r} for synth key '{key}'", key=key
            )

    seed = int(values.pop("seed", 0))
    if seed < 0:
        raise InvalidConfigError(f"seed must be non-negative, got {seed}", key="seed")
    if "class_weights" in values:
        values["class_weights"] = _normalized(values["class_weights"])
    try:
        return SynthSpec(**values), seed
    except ValidationError as e:
        raise InvalidConfigError(_describe(e, path), path=str(path)) from e


_FIELD_TO_KEY = {name: key for key, (_, name, _) in _KEYS.items()}


def _describe(error: ValidationError, path: Path) -> str:
    parts = []
    for item in error.errors():
        location = [str(loc) for loc in item["loc"] if not str(loc).isdigit()]
        name = location[-1] if location else "config"
        key = _FIELD_TO_KEY.get(name, name)
        parts.append(f"{key}: {item['msg']}")
    return f"Invalid configuration in {path}: " + "; ".join(parts)


settings = Settings()
