import numpy as np
import pytest

from poai.dataset import generate_dataset
from poai.features import NodeFeatures
from poai.scorer.model import init_model
from poai.scorer.train import TrainConfig, train

ACCEPTANCE_DATASET_SEED = 42
ACCEPTANCE_TRAIN_SEED = 0


@pytest.fixture(scope="session")
def acceptance_dataset():
    """10k noise-free samples used by the training-quality criteria."""
    return generate_dataset(10_000, seed=ACCEPTANCE_DATASET_SEED, noise_std=0.0)


@pytest.fixture(scope="session")
def acceptance_model(acceptance_dataset):
    """Scorer trained once per session at the default configuration."""
    cfg = TrainConfig(seed=ACCEPTANCE_TRAIN_SEED)
    fitted, report = train(init_model(ACCEPTANCE_TRAIN_SEED), acceptance_dataset, cfg)
    return fitted, report


@pytest.fixture
def sample_row_one() -> NodeFeatures:
    """First reference node: mid capability, zero attract risk."""
    return NodeFeatures(
        node_id=1,
        computing_power_ratio=0.12,
        online_time=1000.0,
        payoff=5000.0,
        hop=50.0,
        connection_number=200.0,
        latency=0.01,
        discarded_probability=0.04,
        attacked_probability=0.002,
        attract_probability=0.0,
    )


@pytest.fixture
def sample_row_two() -> NodeFeatures:
    """Second reference node: strongest capability of the fixtures."""
    return NodeFeatures(
        node_id=2,
        computing_power_ratio=0.22,
        online_time=650.0,
        payoff=10000.0,
        hop=125.0,
        connection_number=1000.0,
        latency=0.001,
        discarded_probability=0.03,
        attacked_probability=0.001,
        attract_probability=0.0,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
