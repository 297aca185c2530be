"""Synthetic stand-in for the skin-lesion pixel data.

Each class gets a random anchor image in [0, 1]^d; samples are the anchor
plus uniform noise, clipped back into [0, 1]. Class counts are drawn from a
multinomial over the class weights, so imbalance can mirror the real data.
"""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from fedflip.ingest.dataset import CLASS_NAMES, IMAGE_PIXELS, LabeledDataset
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)

# Per-class test supports of the reference global-model report (2003 rows).
HAM10000_SUPPORTS = (61, 96, 228, 37, 1327, 32, 222)
HAM10000_WEIGHTS = tuple(s / sum(HAM10000_SUPPORTS) for s in HAM10000_SUPPORTS)


class SynthSpec(BaseModel):
    """Shape of a synthetic dataset."""

    model_config = ConfigDict(frozen=True)

    n_samples: int = Field(default=5000, ge=1, description="Number of rows")
    class_weights: List[float] = Field(
        default_factory=lambda: list(HAM10000_WEIGHTS),
        description="Class probabilities, one per class",
    )
    cluster_spread: float = Field(default=0.35, ge=0.0, description="Half-width of per-pixel noise")
    n_features: int = Field(default=IMAGE_PIXELS, ge=1, description="Pixels per row")

    @field_validator("class_weights")
    @classmethod
    def weights_are_distribution(cls, v: List[float]) -> List[float]:
        if len(v) != len(CLASS_NAMES):
            raise ValueError(f"expected {len(CLASS_NAMES)} class weights, got {len(v)}")
        if any(w < 0 for w in v):
            raise ValueError("class weights must be non-negative")
        if abs(sum(v) - 1.0) > 1e-9:
            raise ValueError(f"class weights must sum to 1, got {sum(v)!r}")
        return v


def synth_dataset(spec: SynthSpec, seed: int) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    num_classes = len(spec.class_weights)

    anchors = rng.uniform(0.0, 1.0, size=(num_classes, spec.n_features))
    # multinomial needs weights that sum to <= 1 in float arithmetic
    weights = np.asarray(spec.class_weights, dtype=np.float64)
    counts = rng.multinomial(spec.n_samples, weights / weights.sum())
    labels = rng.permutation(np.repeat(np.arange(num_classes), counts))

    noise = rng.uniform(-spec.cluster_spread, spec.cluster_spread,
                        size=(spec.n_samples, spec.n_features))
    features = np.clip(anchors[labels] + noise, 0.0, 1.0)

    logger.info(f"Synthesised {spec.n_samples} rows, class counts {counts.tolist()}")
    return LabeledDataset(features, labels, CLASS_NAMES)
