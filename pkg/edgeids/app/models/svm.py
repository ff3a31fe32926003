import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from edgeids.app.core.errors import DataError, ModelInvariantError, TrainingError
from edgeids.app.data.dataset import Dataset
from edgeids.app.data.labels import Target
from edgeids.app.data.schema import FEATURE_COUNT
from edgeids.app.models.base import ModelKind, require_finite
from edgeids.app.models.config import TrainConfig

logger = logging.getLogger("edgeids")


@dataclass(frozen=True)
class SvmModel:
    """Linear one-vs-rest SVM: one weight row and one bias per class."""
    target: Target
    weights: np.ndarray
    biases: np.ndarray

    kind = ModelKind.SVM

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float32)
        biases = np.asarray(self.biases, dtype=np.float32)
        k = self.target.num_classes
        if weights.shape != (k, FEATURE_COUNT):
            raise ModelInvariantError(
                f"SVM weights must be ({k}, {FEATURE_COUNT}), got {weights.shape}"
            )
        if biases.shape != (k,):
            raise ModelInvariantError(f"SVM biases must have {k} entries")
        require_finite("SVM", weights, biases)
        for name, array in (("weights", weights), ("biases", biases)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def num_classes(self) -> int:
        return self.target.num_classes

    @property
    def num_features(self) -> int:
        return int(self.weights.shape[1])

    def margins(self, inputs: np.ndarray) -> np.ndarray:
        return inputs.astype(np.float64) @ self.weights.T.astype(np.float64) + self.biases

    def scores(self, inputs: np.ndarray) -> np.ndarray:
        """Margins mapped through softmax."""
        return softmax(self.margins(inputs), axis=1).astype(np.float32)


def train_svm(train: Dataset, target: Target, cfg: TrainConfig) -> SvmModel:
    """
    One-vs-rest hinge loss with L2 penalty `alpha`, minimized by mini-batch SGD in
    float64. The learning rate decays as lr / (1 + alpha * lr * step).
    """
    if train.rows == 0:
        raise DataError("Cannot train on an empty dataset")
    settings = cfg.svm
    k = target.num_classes
    x = train.features.astype(np.float64)
    labels = train.targets(target)
    # +1 for the row's own class, -1 for every other class
    signs = np.where(np.arange(k)[None, :] == labels[:, None], 1.0, -1.0)

    rng = np.random.default_rng(cfg.seed)
    weights = np.zeros((k, x.shape[1]))
    biases = np.zeros(k)
    step = 0
    for epoch in range(settings.epochs):
        order = rng.permutation(train.rows)
        for batch, start in enumerate(range(0, train.rows, settings.batch_size)):
            idx = order[start:start + settings.batch_size]
            xb, yb = x[idx], signs[idx]
            margin = yb * (xb @ weights.T + biases)
            active = (margin < 1.0) * yb
            grad_w = -(active.T @ xb) / idx.size + settings.alpha * weights
            grad_b = -active.sum(axis=0) / idx.size
            lr = settings.learning_rate / (1.0 + settings.alpha * settings.learning_rate * step)
            weights -= lr * grad_w
            biases -= lr * grad_b
            step += 1
            if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(biases))):
                raise TrainingError(
                    f"Non-finite SVM parameters at epoch {epoch}, batch {batch}", epoch=epoch, batch=batch
                )

    logger.info(f"Trained {target.value} linear SVM on {train.rows} rows ({settings.epochs} epochs)")
    return SvmModel(target=target, weights=weights, biases=biases)
