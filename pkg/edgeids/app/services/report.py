"""
Comparison report over the results of a run directory.

Every table is built once as preformatted string cells; the markdown document
and the CSV siblings are both rendered from those cells.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from edgeids.app.core.errors import NothingToReportError
from edgeids.app.costmodel.model import PlatformCandidate, recommend_platform
from edgeids.app.data.labels import Target
from edgeids.app.engines.bench import BenchResult
from edgeids.app.engines.config import EngineKind
from edgeids.app.evaluation.metrics import EvalReport
from edgeids.app.evaluation.selection import SelectionResult
from edgeids.app.services.fixtures import (
    ALGORITHM_FIXTURE,
    PLATFORM_FIXTURE,
    DESIGNS_FIXTURE,
    load_fixture_table,
    published_candidates,
)
from edgeids.app.services.pipeline import (
    BENCH_FILE,
    COST_FILE,
    EVAL_FILE,
    SELECTION_FILE,
    CostSummary,
    read_json,
)

logger = logging.getLogger("edgeids")

REPORT_FILE = "report.md"
MISSING = "-"

FLEXIBILITY_NOTES = (
    "The dataflow design fixes its arithmetic and topology at synthesis time: changing "
    "the network means regenerating and re-synthesizing the hardware, and new weights "
    "can only be loaded when the design includes an external weight-loading path. The "
    "soft-core processor runs the model as software, so topology and parameters change "
    "with a recompile, at the cost of roughly six times less throughput."
)

FLEXIBILITY_ROWS = [
    ["floating point", "yes", "yes"],
    ["fixed point", "yes", "no"],
    ["integer", "yes", "INT8/16/32 only"],
    ["computation precision", "fixed at synthesis", "flexible"],
    ["topology update", "not on the fly", "on the fly"],
    ["parameter update", "only with external weight loading", "yes"],
    ["update time", "longer (re-synthesis)", "shorter (recompile)"],
]


def _num(value: Optional[float], digits: int) -> str:
    if value is None:
        return MISSING
    return f"{value:.{digits}f}"


@dataclass(frozen=True)
class ReportTable:
    name: str
    title: str
    columns: List[str]
    rows: List[List[str]]

    def to_markdown(self) -> str:
        lines = [
            "| " + " | ".join(self.columns) + " |",
            "|" + "|".join("---" for _ in self.columns) + "|",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in self.rows]
        return "\n".join(lines)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns, dtype=str)

    @classmethod
    def from_fixture(cls, name: str, title: str, fixture: str) -> "ReportTable":
        frame = load_fixture_table(fixture)
        return cls(name=name, title=title, columns=list(frame.columns), rows=frame.values.tolist())


class ReportBundle(BaseModel):
    """Whatever results a run directory holds; a report needs evaluations, benchmarks or cost."""
    evaluations: List[EvalReport] = []
    selection: Dict[Target, SelectionResult] = {}
    bench: List[BenchResult] = []
    cost: Optional[CostSummary] = None
    required_pps: Optional[float] = None
    generated_at: Optional[str] = None

    @property
    def is_empty(self) -> bool:
        return not self.evaluations and not self.bench and self.cost is None

    @classmethod
    def from_run_dir(cls, run_dir: Path, required_pps: Optional[float] = None,
                     generated_at: Optional[str] = None) -> "ReportBundle":
        run_dir = Path(run_dir)

        def optional(name: str):
            return read_json(run_dir / name) if (run_dir / name).exists() else None

        evaluations = optional(EVAL_FILE) or []
        selection = optional(SELECTION_FILE) or {}
        bench = optional(BENCH_FILE) or []
        cost = optional(COST_FILE)
        return cls(
            evaluations=[EvalReport.model_validate(item) for item in evaluations],
            selection={Target(key): SelectionResult.model_validate(value) for key, value in selection.items()},
            bench=[BenchResult.model_validate(item) for item in bench],
            cost=CostSummary.model_validate(cost) if cost is not None else None,
            required_pps=required_pps,
            generated_at=generated_at,
        )


@dataclass(frozen=True)
class Report:
    markdown: str
    tables: List[ReportTable]

    def write(self, out_dir: Path) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [out_dir / REPORT_FILE]
        paths[0].write_text(self.markdown, encoding="utf-8")
        for table in self.tables:
            path = out_dir / f"report_{table.name}.csv"
            table.to_frame().to_csv(path, index=False, lineterminator="\n")
            paths.append(path)
        logger.info(f"Wrote report with {len(self.tables)} tables to {out_dir}")
        return paths


def _target_of(model_name: str) -> str:
    return model_name.rsplit("-", 1)[-1]


def metrics_table(evaluations: List[EvalReport]) -> ReportTable:
    order = {target: i for i, target in enumerate(Target)}
    rows = []
    for r in sorted(evaluations, key=lambda r: (order[r.target], r.model_name)):
        rows.append([
            r.model_name,
            r.target.value,
            _num(r.macro.precision, 4),
            _num(r.macro.recall, 4),
            _num(r.macro.f1, 4),
            _num(r.weighted.f1, 4),
            _num(r.model_size_bytes / 1000, 2),
            str(r.samples),
        ])
    return ReportTable(
        name="metrics",
        title="Classification quality and model size (macro averages, held-out split)",
        columns=["model", "target", "precision", "recall", "f1", "weighted_f1", "size_kb", "samples"],
        rows=rows,
    )


def selection_table(selection: Dict[Target, SelectionResult]) -> ReportTable:
    rows = []
    for target in Target:
        result = selection.get(target)
        if result is None:
            continue
        rows += [[target.value, str(rank), name, "kept"] for rank, name in enumerate(result.ranked, start=1)]
        rows += [[target.value, MISSING, name, "eliminated"] for name in result.eliminated]
    return ReportTable(
        name="selection",
        title="Model selection",
        columns=["target", "rank", "model", "status"],
        rows=rows,
    )


def throughput_table(bench: List[BenchResult], cost: Optional[CostSummary]) -> ReportTable:
    reference = {(c.platform, c.model): c for c in published_candidates()}
    measured = {(b.engine.kind.value, _target_of(b.model_name)): b for b in bench}

    rows = []
    for platform in (EngineKind.DATAFLOW.value, EngineKind.SEQUENTIAL.value):
        for target in Target:
            key = (platform, target.value)
            run = measured.get(key)
            modeled = cost.estimates.get(target.value) if cost and platform == EngineKind.DATAFLOW.value else None
            if run is None and modeled is None:
                continue
            published = reference.get(key)
            rows.append([
                platform,
                target.value,
                _num(run.throughput_pps if run else None, 0),
                _num(run.efficiency_pps_per_watt if run else None, 0),
                _num(run.density_pps_per_lut if run else None, 3),
                _num(modeled.throughput_pps if modeled else None, 0),
                _num(published.throughput_pps if published else None, 0),
                _num(published.efficiency_pps_per_watt if published else None, 0),
                _num(published.density_pps_per_lut if published else None, 3),
            ])
    return ReportTable(
        name="throughput",
        title="Throughput, energy efficiency and logic density: measured, modeled and published",
        columns=[
            "platform", "model",
            "measured_pps", "measured_pps_per_watt", "measured_pps_per_lut",
            "modeled_pps",
            "published_pps", "published_pps_per_watt", "published_pps_per_lut",
        ],
        rows=rows,
    )


def resources_table(cost: CostSummary) -> ReportTable:
    published = load_fixture_table(DESIGNS_FIXTURE).set_index("design")
    rows = []
    for target in Target:
        modeled = cost.estimates.get(target.value)
        if modeled is None:
            continue
        design = f"dataflow-{target.value}"
        row = published.loc[design] if design in published.index else None
        rows.append([
            target.value,
            str(cost.reuse_factor),
            str(modeled.lut),
            str(modeled.dsp),
            _num(cost.lut_usage_pct[target.value], 1),
            _num(modeled.throughput_pps, 0),
            row["lut"] if row is not None else MISSING,
            row["usage_ratio_pct"] if row is not None else MISSING,
        ])
    return ReportTable(
        name="resources",
        title=f"Modeled dataflow resources ({cost.lut_capacity} LUT device)",
        columns=[
            "model", "reuse_factor", "modeled_lut", "modeled_dsp", "modeled_usage_pct",
            "modeled_pps", "published_lut", "published_usage_pct",
        ],
        rows=rows,
    )


def measured_candidates(bench: List[BenchResult]) -> List[PlatformCandidate]:
    return [
        PlatformCandidate(
            platform=b.engine.kind.value,
            model=_target_of(b.model_name),
            throughput_pps=b.throughput_pps,
            efficiency_pps_per_watt=b.efficiency_pps_per_watt,
            density_pps_per_lut=b.density_pps_per_lut,
        )
        for b in bench
    ]


def recommendation_table(bundle: ReportBundle) -> ReportTable:
    sources = [("published", published_candidates())]
    if bundle.bench:
        sources.append(("measured", measured_candidates(bundle.bench)))
    rows = []
    for source, candidates in sources:
        choice = recommend_platform(candidates, bundle.required_pps)
        rows.append([
            source,
            _num(bundle.required_pps, 0),
            choice.platform if choice else "none",
            choice.model if choice else MISSING,
            _num(choice.throughput_pps if choice else None, 0),
            _num(choice.efficiency_pps_per_watt if choice else None, 0),
        ])
    return ReportTable(
        name="recommendation",
        title="Platform recommendation (fastest-enough candidate with the best energy efficiency)",
        columns=["source", "required_pps", "platform", "model", "throughput_pps", "efficiency_pps_per_watt"],
        rows=rows,
    )


def flexibility_table() -> ReportTable:
    return ReportTable(
        name="flexibility",
        title="Flexibility of the dataflow design versus the soft-core processor",
        columns=["feature", "dataflow", "sequential"],
        rows=[list(row) for row in FLEXIBILITY_ROWS],
    )


def render_report(bundle: ReportBundle) -> Report:
    if bundle.is_empty:
        raise NothingToReportError("nothing to report: no evaluation, benchmark or cost results")

    tables: List[ReportTable] = []
    if bundle.evaluations:
        tables.append(metrics_table(bundle.evaluations))
        tables.append(ReportTable.from_fixture("published_algorithms", "Published algorithm comparison", ALGORITHM_FIXTURE))
    if bundle.selection:
        tables.append(selection_table(bundle.selection))
    if bundle.bench or bundle.cost:
        tables.append(throughput_table(bundle.bench, bundle.cost))
        tables.append(ReportTable.from_fixture("published_platforms", "Published platform comparison", PLATFORM_FIXTURE))
    if bundle.cost:
        tables.append(resources_table(bundle.cost))
        tables.append(ReportTable.from_fixture("published_designs", "Published FPGA IDS designs", DESIGNS_FIXTURE))
    if bundle.required_pps is not None:
        tables.append(recommendation_table(bundle))
    tables.append(flexibility_table())

    parts = ["# Edge IDS report", ""]
    if bundle.generated_at:
        parts += [f"Generated: {bundle.generated_at}", ""]
    for table in tables:
        parts += [f"## {table.title}", "", table.to_markdown(), ""]
        if table.name == "flexibility":
            parts += [FLEXIBILITY_NOTES, ""]
    return Report(markdown="\n".join(parts), tables=tables)
