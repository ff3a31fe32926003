import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from edgeids.app.core.errors import DataError, ModelInvariantError
from edgeids.app.data.dataset import Dataset
from edgeids.app.data.labels import Target
from edgeids.app.models.base import ModelKind, require_finite
from edgeids.app.models.config import TrainConfig

logger = logging.getLogger("edgeids")


@dataclass(frozen=True)
class NaiveBayesModel:
    """Gaussian naive Bayes: class priors plus per-class feature means and variances."""
    target: Target
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    var_floor: float = 1e-9

    kind = ModelKind.NB

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=np.float32)
        means = np.asarray(self.means, dtype=np.float32)
        variances = np.asarray(self.variances, dtype=np.float32)
        k = self.target.num_classes
        if priors.shape != (k,) or means.ndim != 2 or means.shape[0] != k or variances.shape != means.shape:
            raise ModelInvariantError("Naive Bayes parameter shapes are inconsistent")
        require_finite("Naive Bayes", priors, means, variances)
        if np.any(variances < np.float32(self.var_floor)):
            raise ModelInvariantError("Naive Bayes variance below the variance floor")
        if np.any(priors < 0):
            raise ModelInvariantError("Naive Bayes priors must be non-negative")
        for name, array in (("priors", priors), ("means", means), ("variances", variances)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def num_classes(self) -> int:
        return self.target.num_classes

    @property
    def num_features(self) -> int:
        return int(self.means.shape[1])

    def joint_log_likelihood(self, inputs: np.ndarray) -> np.ndarray:
        x = inputs.astype(np.float64)
        means = self.means.astype(np.float64)
        variances = self.variances.astype(np.float64)
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors.astype(np.float64))
        norm = -0.5 * np.log(2.0 * np.pi * variances).sum(axis=1)
        sq = np.empty((x.shape[0], means.shape[0]))
        for class_id in range(means.shape[0]):
            sq[:, class_id] = ((x - means[class_id]) ** 2 / variances[class_id]).sum(axis=1)
        return log_prior[None, :] + norm[None, :] - 0.5 * sq

    def scores(self, inputs: np.ndarray) -> np.ndarray:
        """Class posteriors."""
        return softmax(self.joint_log_likelihood(inputs), axis=1).astype(np.float32)


def train_naive_bayes(train: Dataset, target: Target, cfg: TrainConfig) -> NaiveBayesModel:
    if train.rows == 0:
        raise DataError("Cannot train on an empty dataset")
    k = target.num_classes
    labels = train.targets(target)
    x = train.features.astype(np.float64)
    floor = cfg.nb.var_floor

    priors = np.zeros(k)
    means = np.zeros((k, x.shape[1]))
    variances = np.ones((k, x.shape[1]))
    for class_id in range(k):
        members = x[labels == class_id]
        if members.shape[0] == 0:
            continue
        priors[class_id] = members.shape[0] / train.rows
        means[class_id] = members.mean(axis=0)
        variances[class_id] = np.maximum(members.var(axis=0), floor)

    logger.info(f"Trained {target.value} naive Bayes on {train.rows} rows")
    return NaiveBayesModel(
        target=target,
        priors=priors,
        means=means,
        variances=np.maximum(variances.astype(np.float32), np.float32(floor)),
        var_floor=floor,
    )
