import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from edgeids.app.core.errors import DataError
from edgeids.app.data.dataset import Dataset
from edgeids.app.data.labels import Target
from edgeids.app.models.serialization import Model, model_size
from edgeids.app.models.zoo import model_name, predict_batch

logger = logging.getLogger("edgeids")


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[t][p] = number of samples with truth t predicted as p."""
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DataError(f"Confusion matrix must be square, got shape {counts.shape}")
        if np.any(counts < 0):
            raise DataError("Confusion matrix entries must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


class Scores(BaseModel):
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)


class ClassScores(Scores):
    label: str
    support: int = Field(ge=0)


class MetricsFragment(BaseModel):
    per_class: List[ClassScores]
    macro: Scores
    weighted: Scores
    accuracy: float = Field(ge=0.0, le=1.0)


class EvalReport(MetricsFragment):
    """
    Algorithm-level criteria of one trained model on one target.
    Reports loaded from published tables carry no per-class rows (`source="fixture"`).
    """
    model_name: str
    target: Target
    model_size_bytes: int = Field(ge=0)
    samples: int = Field(default=0, ge=0)
    confusion: Optional[List[List[int]]] = None
    source: str = "measured"


def confusion(preds: np.ndarray, truth: np.ndarray, k: int) -> ConfusionMatrix:
    preds = np.asarray(preds, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape or preds.ndim != 1:
        raise DataError(f"Predictions {preds.shape} and truth {truth.shape} must be equal-length vectors")
    for name, ids in (("prediction", preds), ("truth", truth)):
        if ids.size and (ids.min() < 0 or ids.max() >= k):
            raise DataError(f"{name} class id out of range [0, {k})")
    counts = np.bincount(truth * k + preds, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts)


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # x / 0 is 0 by convention
    out = np.zeros(num.shape, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def metrics(cm: ConfusionMatrix, class_names: Optional[List[str]] = None) -> MetricsFragment:
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    support = cm.counts.sum(axis=1)

    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2.0 * precision * recall, precision + recall)

    names = class_names or [str(i) for i in range(cm.k)]
    per_class = [
        ClassScores(label=names[i], precision=precision[i], recall=recall[i], f1=f1[i], support=int(support[i]))
        for i in range(cm.k)
    ]
    macro = Scores(precision=precision.mean(), recall=recall.mean(), f1=f1.mean())

    total = cm.total
    if total:
        share = support / total
        weighted = Scores(
            precision=min(1.0, float(share @ precision)),
            recall=min(1.0, float(share @ recall)),
            f1=min(1.0, float(share @ f1)),
        )
    else:
        weighted = Scores(precision=0.0, recall=0.0, f1=0.0)
    accuracy = float(tp.sum() / total) if total else 0.0
    return MetricsFragment(per_class=per_class, macro=macro, weighted=weighted, accuracy=accuracy)


def evaluate(model: Model, ds: Dataset, target: Target, name: Optional[str] = None) -> EvalReport:
    """Predict `ds`, tally the confusion matrix and attach the serialized model size."""
    if ds.rows == 0:
        raise DataError("Cannot evaluate on an empty dataset")
    preds, _ = predict_batch(model, ds.features)
    cm = confusion(preds, ds.targets(target), target.num_classes)
    fragment = metrics(cm, list(target.class_names))
    report = EvalReport(
        **fragment.model_dump(),
        model_name=name or model_name(model),
        target=target,
        model_size_bytes=model_size(model),
        samples=ds.rows,
        confusion=cm.counts.tolist(),
    )
    logger.info(
        f"{report.model_name}: macro P={report.macro.precision:.3f} R={report.macro.recall:.3f} "
        f"F1={report.macro.f1:.3f} size={report.model_size_bytes} B"
    )
    return report
