from edgeids.app.models.base import ModelKind
from edgeids.app.models.config import TrainConfig
from edgeids.app.models.mlp import MlpModel, MlpTopology, train_mlp
from edgeids.app.models.naive_bayes import NaiveBayesModel
from edgeids.app.models.serialization import Model, deserialize, model_size, serialize
from edgeids.app.models.svm import SvmModel
from edgeids.app.models.tree import ForestModel, TreeModel
from edgeids.app.models.zoo import (
    load_model,
    model_id,
    model_name,
    predict,
    predict_batch,
    save_model,
    train_baseline,
    train_model,
)

__all__ = [
    "ForestModel",
    "MlpModel",
    "MlpTopology",
    "Model",
    "ModelKind",
    "NaiveBayesModel",
    "SvmModel",
    "TrainConfig",
    "TreeModel",
    "deserialize",
    "load_model",
    "model_id",
    "model_name",
    "model_size",
    "predict",
    "predict_batch",
    "save_model",
    "serialize",
    "train_baseline",
    "train_mlp",
    "train_model",
]
