"""
Entry points over every classifier family: training dispatch, prediction,
identity hashing and file persistence.
"""
import hashlib
import logging
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np

from edgeids.app.core.errors import DataError, UsageError
from edgeids.app.data.dataset import Dataset
from edgeids.app.data.labels import Target
from edgeids.app.models.base import ModelKind, check_arity
from edgeids.app.models.config import TrainConfig
from edgeids.app.models.kernels import mlp_forward
from edgeids.app.models.mlp import train_mlp
from edgeids.app.models.naive_bayes import train_naive_bayes
from edgeids.app.models.serialization import Model, deserialize, serialize
from edgeids.app.models.svm import train_svm
from edgeids.app.models.tree import train_decision_tree, train_random_forest

logger = logging.getLogger("edgeids")

_TRAINERS: Dict[ModelKind, Callable[[Dataset, Target, TrainConfig], Model]] = {
    ModelKind.MLP: train_mlp,
    ModelKind.NB: train_naive_bayes,
    ModelKind.DT: train_decision_tree,
    ModelKind.RF: train_random_forest,
    ModelKind.SVM: train_svm,
}


def train_model(kind: ModelKind, train: Dataset, target: Target, cfg: TrainConfig) -> Model:
    if train.rows == 0:
        raise DataError("Cannot train on an empty dataset")
    return _TRAINERS[kind](train, target, cfg)


def train_baseline(kind: ModelKind, train: Dataset, target: Target, cfg: TrainConfig) -> Model:
    if kind is ModelKind.MLP:
        raise UsageError("train_baseline covers NB, DT, RF and SVM; use train_mlp for the MLP heads")
    return train_model(kind, train, target, cfg)


def model_scores(model: Model, features: np.ndarray) -> np.ndarray:
    """Per-class scores (rows x K) as float32."""
    inputs = check_arity(features, model.num_features)
    if model.kind is ModelKind.MLP:
        return mlp_forward(inputs, model.weights, model.biases)
    return np.asarray(model.scores(inputs), dtype=np.float32)


def predict_batch(model: Model, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(class ids, scores) for every row; argmax ties go to the lowest class index."""
    scores = model_scores(model, features)
    return np.argmax(scores, axis=1), scores


def predict(model: Model, x: np.ndarray) -> Tuple[int, np.ndarray]:
    class_ids, scores = predict_batch(model, np.asarray(x, dtype=np.float32).reshape(1, -1))
    return int(class_ids[0]), scores[0]


def model_id(model: Model) -> str:
    """SHA-256 of the serialized model."""
    return hashlib.sha256(serialize(model)).hexdigest()


def model_name(model: Model) -> str:
    return f"{model.kind.label}-{model.target.value}"


def save_model(model: Model, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize(model))
    logger.info(f"Saved {model_name(model)} to {path}")
    return path


def load_model(path: Path) -> Model:
    path = Path(path)
    if not path.exists():
        raise DataError(f"Model file not found: {path}")
    return deserialize(path.read_bytes())
