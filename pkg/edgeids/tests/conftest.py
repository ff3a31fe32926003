import numpy as np
import pytest

from edgeids.app.data.dataset import fit_normalize, apply_normalize, stratified_split
from edgeids.app.data.synth import UNIFORM_CLASS_WEIGHTS, SynthSpec, synthesize
from edgeids.app.models.config import MlpTrainConfig, TrainConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running throughput measurements")


@pytest.fixture(scope="session")
def synth_dataset():
    return synthesize(SynthSpec(rows=3500, class_weights=list(UNIFORM_CLASS_WEIGHTS), separation=4.0, seed=7))


@pytest.fixture(scope="session")
def split(synth_dataset):
    """(normalized train, normalized holdout) of the separable synthetic set."""
    train_raw, test_raw = stratified_split(synth_dataset, 0.8, seed=7)
    train = fit_normalize(train_raw)
    return train, apply_normalize(test_raw, train.norm_stats)


@pytest.fixture(scope="session")
def train_cfg():
    return TrainConfig(
        seed=7,
        mlp=MlpTrainConfig(epochs=30, batch_size=64, learning_rate=0.01),
    )


@pytest.fixture(scope="session")
def trained_heads(split, train_cfg):
    from edgeids.app.data.labels import Target
    from edgeids.app.models.mlp import train_mlp

    train, _ = split
    return {target: train_mlp(train, target, train_cfg) for target in Target}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
