"""Pytest fixtures."""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from fedflip.config import HyperParams, Settings
from fedflip.ingest.dataset import LabeledDataset
from fedflip.ingest.synth import SynthSpec, synth_dataset


@pytest.fixture
def temp_dir():
    """Create temporary directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def test_settings(temp_dir):
    """Single-threaded settings with logs under the temp dir."""
    return Settings(threads=1, log_level="WARNING", log_file=None)


@pytest.fixture
def small_data() -> LabeledDataset:
    """200 rows of 16-pixel synthetic data."""
    return synth_dataset(SynthSpec(n_samples=200, n_features=16, cluster_spread=0.2), seed=7)


@pytest.fixture
def small_hp() -> HyperParams:
    return HyperParams(
        input_dim=16,
        hidden_dims=(8,),
        n_clients=4,
        comm_rounds=3,
        batch_size=8,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
