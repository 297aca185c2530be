"""Test CSV loading, splitting, partitioning, batching and synthesis."""

import math
from pathlib import Path

import numpy as np
import pytest

from fedflip.errors import (
    DatasetInvariantError,
    EmptySplitError,
    HeaderError,
    LabelRangeError,
    MalformedRowError,
    MissingFileError,
    NonNumericCellError,
    PartitionError,
)
from fedflip.ingest.csv import load_csv, pixel_columns, save_csv
from fedflip.ingest.dataset import CLASS_NAMES, ClientShard, LabeledDataset
from fedflip.ingest.partition import batches, partition_iid, train_test_split
from fedflip.ingest.synth import HAM10000_SUPPORTS, SynthSpec, synth_dataset


def write_csv(path: Path, rows, n_features: int = 784, header=None) -> Path:
    header = header if header is not None else pixel_columns(n_features) + ["label"]
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def indexed(n: int, n_features: int = 1) -> LabeledDataset:
    """Dataset whose first feature encodes the row index."""
    features = np.tile((np.arange(n) / max(n, 1))[:, None], (1, n_features))
    return LabeledDataset(features, np.arange(n) % 7)


def test_load_scaled_rows(temp_dir):
    """Test values already in [0, 1] are taken as is."""
    rows = [[0.25] * 784 + [1], [0.75] * 784 + [4]]
    data = load_csv(write_csv(temp_dir / "data.csv", rows))

    assert len(data) == 2
    assert data.labels.tolist() == [1, 4]
    assert np.all(data.features[0] == 0.25)
    assert np.all(data.features[1] == 0.75)


def test_load_raw_greyscale(temp_dir):
    rows = [[255] + [0] * 783 + [0]]
    data = load_csv(write_csv(temp_dir / "raw.csv", rows))

    assert data.features[0, 0] == 1.0
    assert data.features[0, 1:].max() == 0.0


def test_load_first_scaled_row_verbatim(temp_dir):
    rows = [[0.674510, 0.670588, 0.678431] + [0.5] * 781 + [2]]
    data = load_csv(write_csv(temp_dir / "scaled.csv", rows))

    assert data.features[0, :3].tolist() == [0.674510, 0.670588, 0.678431]


def test_load_preserves_row_order(temp_dir):
    rows = [[i / 10] * 4 + [i % 7] for i in range(10)]
    data = load_csv(write_csv(temp_dir / "order.csv", rows, n_features=4), n_features=4)

    assert data.features[:, 0].tolist() == [i / 10 for i in range(10)]
    assert data.labels.tolist() == [i % 7 for i in range(10)]


def test_load_missing_file(temp_dir):
    with pytest.raises(MissingFileError):
        load_csv(temp_dir / "nope.csv")


def test_load_short_row(temp_dir):
    rows = [[0.1] * 4 + [0], [0.1] * 3 + [0]]
    with pytest.raises(MalformedRowError) as exc_info:
        load_csv(write_csv(temp_dir / "short.csv", rows, n_features=4), n_features=4)
    assert exc_info.value.row == 2


def test_load_empty_cell(temp_dir):
    rows = [[0.1] * 4 + [0], [0.1, "", 0.1, 0.1, 0]]
    with pytest.raises(MalformedRowError) as exc_info:
        load_csv(write_csv(temp_dir / "blank.csv", rows, n_features=4), n_features=4)
    assert exc_info.value.row == 2


def test_load_long_row(temp_dir):
    rows = [[0.1] * 4 + [0], [0.1] * 4 + [0], [0.1] * 5 + [0]]
    with pytest.raises(MalformedRowError):
        load_csv(write_csv(temp_dir / "long.csv", rows, n_features=4), n_features=4)


@pytest.mark.parametrize("cell", ["abc", "nan", "NA", "N/A"])
def test_load_non_numeric_cell(temp_dir, cell):
    rows = [[0.1] * 4 + [0], [0.1, cell, 0.1, 0.1, 0]]
    with pytest.raises(NonNumericCellError) as exc_info:
        load_csv(write_csv(temp_dir / "text.csv", rows, n_features=4), n_features=4)
    assert exc_info.value.row == 2
    assert exc_info.value.column == "pixel0001"


@pytest.mark.parametrize("label", [7, -1, 2.5])
def test_load_label_out_of_range(temp_dir, label):
    rows = [[0.1] * 4 + [0], [0.1] * 4 + [label]]
    with pytest.raises(LabelRangeError) as exc_info:
        load_csv(write_csv(temp_dir / "label.csv", rows, n_features=4), n_features=4)
    assert exc_info.value.row == 2


def test_load_bad_header(temp_dir):
    header = pixel_columns(3) + ["pixel9999", "label"]
    with pytest.raises(HeaderError):
        load_csv(write_csv(temp_dir / "header.csv", [[0.1] * 4 + [0]], header=header), n_features=4)


def test_load_missing_label_column(temp_dir):
    header = pixel_columns(5)
    with pytest.raises(HeaderError):
        load_csv(write_csv(temp_dir / "nolabel.csv", [[0.1] * 5], header=header), n_features=4)


def test_save_then_load(temp_dir):
    data = synth_dataset(SynthSpec(n_samples=30, n_features=12), seed=3)
    loaded = load_csv(save_csv(data, temp_dir / "out" / "synth.csv"), n_features=12)

    assert np.array_equal(loaded.labels, data.labels)
    np.testing.assert_allclose(loaded.features, data.features, atol=1e-12)


def test_dataset_rejects_out_of_range_features():
    with pytest.raises(DatasetInvariantError):
        LabeledDataset(np.array([[1.5]]), np.array([0]))


def test_dataset_rejects_bad_labels():
    with pytest.raises(DatasetInvariantError):
        LabeledDataset(np.array([[0.5]]), np.array([7]))


def test_empty_shard_rejected():
    with pytest.raises(DatasetInvariantError):
        ClientShard(0, LabeledDataset(np.zeros((0, 3)), np.zeros(0, dtype=np.int64)))


def test_split_full_size():
    train, test = train_test_split(indexed(10_015), 0.2, seed=42)
    assert len(test) == 2003
    assert len(train) == 8012


@pytest.mark.parametrize("seed", [0, 1, 99])
def test_split_small(seed):
    train, test = train_test_split(indexed(10), 0.2, seed)
    assert (len(train), len(test)) == (8, 2)
    rows = sorted(train.features[:, 0].tolist() + test.features[:, 0].tolist())
    assert rows == [i / 10 for i in range(10)]


def test_split_deterministic():
    data = indexed(50)
    first = train_test_split(data, 0.2, seed=5)
    second = train_test_split(data, 0.2, seed=5)
    for a, b in zip(first, second):
        assert np.array_equal(a.features, b.features)


def test_split_empty_side():
    with pytest.raises(EmptySplitError):
        train_test_split(indexed(2), 0.1, seed=0)


def test_partition_even():
    shards = partition_iid(indexed(100), 10, seed=1)
    assert [len(s) for s in shards] == [10] * 10
    assert [s.client_id for s in shards] == list(range(10))


def test_partition_remainder():
    shards = partition_iid(indexed(101), 10, seed=1)
    assert [len(s) for s in shards] == [11] + [10] * 9


def test_partition_covers_train():
    train = indexed(57)
    shards = partition_iid(train, 6, seed=3)

    labels = np.concatenate([s.data.labels for s in shards])
    assert sorted(labels.tolist()) == sorted(train.labels.tolist())
    rows = np.concatenate([s.data.features[:, 0] for s in shards])
    assert sorted(rows.tolist()) == sorted(train.features[:, 0].tolist())


def test_partition_too_many_clients():
    with pytest.raises(PartitionError):
        partition_iid(indexed(5), 6, seed=0)


def test_batches_sizes():
    shard = ClientShard(0, indexed(70))
    assert [len(b) for b in batches(shard, 32, epoch_seed=4)] == [32, 32, 6]


def test_batches_single_batch():
    shard = ClientShard(0, indexed(20))
    result = batches(shard, 64, epoch_seed=4)

    assert len(result) == 1
    assert sorted(result[0].features[:, 0].tolist()) == sorted(shard.data.features[:, 0].tolist())


def test_batches_differ_by_epoch_seed():
    shard = ClientShard(0, indexed(40))
    first = np.concatenate([b.features[:, 0] for b in batches(shard, 8, epoch_seed=1)])
    second = np.concatenate([b.features[:, 0] for b in batches(shard, 8, epoch_seed=2)])

    assert not np.array_equal(first, second)
    assert sorted(first.tolist()) == sorted(second.tolist())


def test_synth_zero_spread():
    data = synth_dataset(SynthSpec(n_samples=100, n_features=10, cluster_spread=0.0), seed=0)
    for label in np.unique(data.labels):
        rows = data.features[data.labels == label]
        assert np.all(rows == rows[0])


def test_synth_class_histogram():
    spec = SynthSpec(n_samples=1000, n_features=8)
    data = synth_dataset(spec, seed=17)

    counts = data.class_counts()
    assert counts.sum() == 1000
    for count, weight in zip(counts, spec.class_weights):
        expected = 1000 * weight
        sigma = math.sqrt(1000 * weight * (1 - weight))
        assert abs(count - expected) <= 4 * sigma


def test_synth_default_layout():
    spec = SynthSpec()
    assert spec.n_features == 784
    assert sum(HAM10000_SUPPORTS) == 2003
    assert spec.class_weights[CLASS_NAMES.index("nv")] == pytest.approx(1327 / 2003)


def test_synth_deterministic():
    spec = SynthSpec(n_samples=50, n_features=5)
    first, second = synth_dataset(spec, 3), synth_dataset(spec, 3)
    assert first.features.tobytes() == second.features.tobytes()
    assert np.array_equal(first.labels, second.labels)


@pytest.mark.parametrize("weights", [[1.0], [0.5, 0.5, 0, 0, 0, 0, -0.0001], [0.2] * 7])
def test_synth_rejects_bad_weights(weights):
    with pytest.raises(ValueError):
        SynthSpec(class_weights=weights)
