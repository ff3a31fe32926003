from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from edgeids.app.core.errors import DataError, UsageError
from edgeids.app.data.dataset import Dataset
from edgeids.app.models.base import ModelKind, check_arity
from edgeids.app.models.mlp import MlpModel


class EngineKind(str, Enum):
    SEQUENTIAL = "sequential"
    DATAFLOW = "dataflow"


class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: EngineKind = EngineKind.DATAFLOW
    lanes: int = Field(default=4, ge=1)
    queue_depth: int = Field(default=8, ge=1)
    # rows per dispatch chunk = reuse_factor x lanes
    reuse_factor: int = Field(default=4, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _sequential_lane_default(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("kind") == EngineKind.SEQUENTIAL.value:
            data = {"lanes": 1, **data}
        return data

    @model_validator(mode="after")
    def _single_lane_sequential(self) -> "EngineConfig":
        if self.kind is EngineKind.SEQUENTIAL and self.lanes != 1:
            raise ValueError("the sequential engine runs a single lane (lanes = 1)")
        return self

    @property
    def chunk_rows(self) -> int:
        return self.reuse_factor * self.lanes

    @property
    def label(self) -> str:
        if self.kind is EngineKind.SEQUENTIAL:
            return "sequential"
        return f"dataflow(lanes={self.lanes},rf={self.reuse_factor},q={self.queue_depth})"

    @classmethod
    def sequential(cls) -> "EngineConfig":
        return cls(kind=EngineKind.SEQUENTIAL, lanes=1)


@dataclass(frozen=True)
class Predictions:
    """Per-row argmax class ids and softmax scores, in input row order."""
    class_ids: np.ndarray
    scores: np.ndarray

    def __len__(self) -> int:
        return int(self.class_ids.shape[0])


def engine_inputs(model: MlpModel, batch: Union[Dataset, np.ndarray]) -> np.ndarray:
    if getattr(model, "kind", None) is not ModelKind.MLP:
        raise UsageError("Inference engines execute MLP models only")
    features = batch.features if isinstance(batch, Dataset) else batch
    inputs = check_arity(features, model.num_features)
    if isinstance(batch, Dataset) and not batch.is_normalized:
        raise DataError("Inference engines expect normalized features")
    return np.ascontiguousarray(inputs)
