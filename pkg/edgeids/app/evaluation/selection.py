import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from edgeids.app.core.config import get_settings
from edgeids.app.core.errors import DataError
from edgeids.app.data.labels import Target
from edgeids.app.evaluation.metrics import EvalReport, Scores

logger = logging.getLogger("edgeids")

ALGORITHM_FIXTURE = "algorithm_comparison.csv"


class SelectionRule(BaseModel):
    """Drop models under the macro-F1 floor, rank the rest by (F1 desc, size asc, name asc)."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    f1_floor: float = Field(default=0.90, ge=0.0, le=1.0)


class SelectionResult(BaseModel):
    target: Target
    eliminated: List[str]
    ranked: List[str]


def select(reports: List[EvalReport], rule: Optional[SelectionRule] = None) -> SelectionResult:
    rule = rule or SelectionRule()
    if not reports:
        raise DataError("Selection needs at least one evaluation report")
    targets = {r.target for r in reports}
    if len(targets) != 1:
        raise DataError(
            f"Selection mixes targets {sorted(t.value for t in targets)}; use select_per_target"
        )
    names = [r.model_name for r in reports]
    if len(set(names)) != len(names):
        raise DataError("Selection needs unique model names")

    eliminated = sorted(r.model_name for r in reports if r.macro.f1 < rule.f1_floor)
    survivors = [r for r in reports if r.macro.f1 >= rule.f1_floor]
    survivors.sort(key=lambda r: (-r.macro.f1, r.model_size_bytes, r.model_name))

    result = SelectionResult(
        target=reports[0].target,
        eliminated=eliminated,
        ranked=[r.model_name for r in survivors],
    )
    logger.info(
        f"Selection ({result.target.value}, floor {rule.f1_floor}): "
        f"eliminated {result.eliminated}, ranked {result.ranked}"
    )
    return result


def select_per_target(reports: Iterable[EvalReport], rule: Optional[SelectionRule] = None) -> Dict[Target, SelectionResult]:
    grouped: Dict[Target, List[EvalReport]] = {}
    for report in reports:
        grouped.setdefault(report.target, []).append(report)
    if not grouped:
        raise DataError("Selection needs at least one evaluation report")
    return {target: select(grouped[target], rule) for target in Target if target in grouped}


def load_published_evaluations(path: Optional[Path] = None) -> List[EvalReport]:
    """Published algorithm comparison (P, R, F1, size) as fixture-sourced EvalReports."""
    path = Path(path) if path else get_settings().fixture(ALGORITHM_FIXTURE)
    frame = pd.read_csv(path)
    required = {"algorithm", "target", "precision", "recall", "f1", "size_bytes"}
    missing = required - set(frame.columns)
    if missing:
        raise DataError(f"{path.name} lacks columns {sorted(missing)}")

    reports = []
    for row in frame.itertuples(index=False):
        scores = Scores(precision=row.precision, recall=row.recall, f1=row.f1)
        reports.append(EvalReport(
            model_name=str(row.algorithm),
            target=Target(row.target),
            per_class=[],
            macro=scores,
            weighted=scores,
            accuracy=0.0,
            model_size_bytes=int(row.size_bytes),
            source="fixture",
        ))
    return reports
