from edgeids.app.evaluation.metrics import ConfusionMatrix, EvalReport, confusion, evaluate, metrics
from edgeids.app.evaluation.selection import (
    SelectionResult,
    SelectionRule,
    load_published_evaluations,
    select,
    select_per_target,
)

__all__ = [
    "ConfusionMatrix",
    "EvalReport",
    "SelectionResult",
    "SelectionRule",
    "confusion",
    "evaluate",
    "load_published_evaluations",
    "metrics",
    "select",
    "select_per_target",
]
