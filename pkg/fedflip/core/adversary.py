"""Label-flipping attack run by a malicious hospital before local training."""

import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from fedflip.ingest.dataset import ClientShard, LabeledDataset
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)


class AttackSpec(BaseModel):
    """Which client poisons its shard, and how much of it."""

    model_config = ConfigDict(frozen=True)

    malicious_client: int = Field(default=0, ge=0, description="Index of the malicious client")
    flip_percent: float = Field(default=0.0, ge=0.0, le=100.0, description="Share of labels to flip")
    seed: int = Field(default=0, ge=0, description="Seed for row and replacement choice")

    def flip_count(self, n: int) -> int:
        """k = floor(p * n / 100)."""
        return math.floor(self.flip_percent * n / 100)


def flip_dataset(
    data: LabeledDataset, spec: AttackSpec, num_classes: int
) -> Tuple[LabeledDataset, List[int]]:
    """Replace k random labels with a uniformly drawn *different* class."""
    rng = np.random.default_rng(spec.seed)
    k = spec.flip_count(len(data))
    if k == 0:
        return data, []

    chosen = np.sort(rng.choice(len(data), size=k, replace=False))
    # an offset in 1..C-1 never maps a class onto itself
    offsets = rng.integers(1, num_classes, size=k)
    labels = data.labels.copy()
    labels[chosen] = (labels[chosen] + offsets) % num_classes

    return data.with_labels(labels), [int(i) for i in chosen]


def flip_labels(
    shard: ClientShard, spec: AttackSpec, num_classes: int
) -> Tuple[ClientShard, List[int]]:
    poisoned, flipped = flip_dataset(shard.data, spec, num_classes)
    logger.info(
        f"Client {shard.client_id}: flipped {len(flipped)} of {len(shard)} labels "
        f"({spec.flip_percent:g}%)"
    )
    return ClientShard(shard.client_id, poisoned), flipped
