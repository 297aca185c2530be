"""Train/test splitting, IID client partitioning and mini-batching."""

from typing import List, Tuple

import numpy as np

from fedflip.core.nn import Batch
from fedflip.errors import EmptySplitError, InvalidConfigError, PartitionError
from fedflip.ingest.dataset import ClientShard, LabeledDataset
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)


def train_test_split(
    data: LabeledDataset, test_fraction: float, seed: int
) -> Tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle, then the first round(n * test_fraction) rows become the test set."""
    if not 0 < test_fraction < 1:
        raise InvalidConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")

    n = len(data)
    n_test = round(n * test_fraction)
    if n_test == 0 or n_test == n:
        raise EmptySplitError(
            f"splitting {n} rows with test_fraction={test_fraction} leaves an empty side",
            n=n,
            test_fraction=test_fraction,
        )

    order = np.random.default_rng(seed).permutation(n)
    test, train = data.subset(order[:n_test]), data.subset(order[n_test:])
    logger.debug(f"Split {n} rows into {len(train)} train / {len(test)} test")
    return train, test


def partition_iid(train: LabeledDataset, n_clients: int, seed: int) -> List[ClientShard]:
    """Shuffle then cut into contiguous chunks; the first n % n_clients get one extra row."""
    if n_clients < 1:
        raise InvalidConfigError(f"n_clients must be >= 1, got {n_clients}")
    if n_clients > len(train):
        raise PartitionError(
            f"cannot partition {len(train)} rows across {n_clients} clients",
            n=len(train),
            n_clients=n_clients,
        )

    order = np.random.default_rng(seed).permutation(len(train))
    chunks = np.array_split(order, n_clients)
    shards = [ClientShard(client_id, train.subset(chunk)) for client_id, chunk in enumerate(chunks)]
    logger.debug(f"Partitioned {len(train)} rows into shards {[len(s) for s in shards]}")
    return shards


def batches(shard: ClientShard, batch_size: int, epoch_seed: int) -> List[Batch]:
    """One epoch of shuffled mini-batches; the final partial batch is kept."""
    if batch_size < 1:
        raise InvalidConfigError(f"batch_size must be >= 1, got {batch_size}")

    data = shard.data
    order = np.random.default_rng(epoch_seed).permutation(len(data))
    return [
        Batch(data.features[idx], data.labels[idx])
        for idx in (order[start:start + batch_size] for start in range(0, len(data), batch_size))
    ]
