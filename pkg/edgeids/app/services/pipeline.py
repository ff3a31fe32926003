import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from edgeids.app.core.clock import utc_iso
from edgeids.app.core.config import get_settings
from edgeids.app.core.errors import DataError
from edgeids.app.core.run_config import RunConfig, SynthWeights, format_run_config
from edgeids.app.costmodel.calibration import CalibrationResult, calibrate, load_observations
from edgeids.app.costmodel.model import CostConstants, CostEstimate, estimate, sweep, utilization_ratio
from edgeids.app.data.dataset import (
    Dataset,
    LoadSummary,
    NormStats,
    apply_normalize,
    decode_labels,
    fit_normalize,
    frame_to_dataset,
    load_arrays,
    read_flow_csv,
    require_columns,
    save_arrays,
    split_indices,
    stratified_split,
)
from edgeids.app.data.labels import Target
from edgeids.app.data.schema import (
    FeatureSchema,
    format_schema,
    parse_schema_mapping,
    resolve_schema,
    synthetic_schema,
)
from edgeids.app.data.synth import IMBALANCED_CLASS_WEIGHTS, UNIFORM_CLASS_WEIGHTS, SynthSpec, synthesize
from edgeids.app.engines.bench import BenchResult, bench, workload_of
from edgeids.app.engines.config import EngineConfig, EngineKind
from edgeids.app.evaluation.metrics import EvalReport, evaluate
from edgeids.app.evaluation.selection import SelectionResult, load_published_evaluations, select_per_target
from edgeids.app.models.base import ModelKind
from edgeids.app.models.mlp import MlpTopology
from edgeids.app.models.serialization import Model, model_size
from edgeids.app.models.zoo import load_model, model_id, model_name, save_model, train_model

logger = logging.getLogger("edgeids")

SCHEMA_FILE = "schema.txt"
NORMALIZATION_FILE = "normalization.json"
RUN_CONFIG_FILE = "run.cfg"
TRAIN_SUMMARY_FILE = "train_summary.json"
EVAL_FILE = "eval.json"
SELECTION_FILE = "selection.json"
BENCH_FILE = "bench.json"
COST_FILE = "cost.json"


def write_json(path: Path, payload) -> None:
    """Stable JSON: sorted keys, fixed indentation, trailing newline."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_json(path: Path):
    if not path.exists():
        raise DataError(f"{path.name} not found in {path.parent}; run the producing command first")
    return json.loads(path.read_text(encoding="utf-8"))


class TrainedModel(BaseModel):
    name: str
    kind: str
    target: Target
    file: str
    model_id: str
    size_bytes: int


class TrainSummary(BaseModel):
    created_at: str
    seed: int
    provenance: str
    rows_total: int
    rows_train: int
    rows_holdout: int
    load_summary: Optional[Dict[str, int]] = None
    models: List[TrainedModel]


class CostSummary(BaseModel):
    constants: CostConstants
    reuse_factor: int
    lut_capacity: int
    estimates: Dict[str, CostEstimate]
    lut_usage_pct: Dict[str, float]
    sweep: Dict[str, List[CostEstimate]] = {}
    calibration: Optional[CalibrationResult] = None


class PipelineService:
    """
    Runs the train -> evaluate -> select -> bench -> cost steps against one run
    directory. Every step reads what earlier steps wrote there.
    """

    def __init__(self, config: RunConfig, run_dir: Path):
        self.config = config
        self.run_dir = Path(run_dir)
        self.settings = get_settings()

    # run directory layout

    @property
    def models_dir(self) -> Path:
        return self.run_dir / self.settings.MODELS_SUBDIR

    def model_path(self, model: Model) -> Path:
        return self.models_dir / f"{model_name(model)}{self.settings.MODEL_FILE_SUFFIX}"

    # data

    def load_split(self) -> Tuple[Dataset, Dataset, FeatureSchema, Optional[LoadSummary]]:
        """
        Raw (train, holdout) parts plus the resolved schema. A CSV is read once; its
        rows are split on their labels before candidate features are ranked, so the
        ranking only sees training rows.
        """
        data = self.config.data
        if data.csv is None:
            weights = IMBALANCED_CLASS_WEIGHTS if data.synth_weights is SynthWeights.IMBALANCED else UNIFORM_CLASS_WEIGHTS
            spec = SynthSpec(
                rows=data.synth_rows,
                class_weights=list(weights),
                separation=data.synth_separation,
                seed=self.config.seed,
                interaction=data.synth_interaction,
            )
            train_raw, holdout_raw = stratified_split(synthesize(spec), data.train_fraction, self.config.seed)
            return train_raw, holdout_raw, synthetic_schema(), None

        schema_path = data.schema_file or self.settings.fixture(self.settings.DEFAULT_SCHEMA_FILE)
        mapping = parse_schema_mapping(schema_path)
        frame = read_flow_csv(data.csv)
        sub_ids, label_ok = decode_labels(frame, mapping)
        labelled = np.flatnonzero(label_ok)
        skipped_labels = int(frame.shape[0] - labelled.size)
        if skipped_labels:
            logger.warning(f"Skipped {skipped_labels} rows with unmappable labels")

        train_pos, test_pos = split_indices(
            sub_ids[labelled].astype(np.int64), data.train_fraction, self.config.seed
        )
        train_frame = frame.iloc[labelled[train_pos]]
        schema = resolve_schema(mapping, train_frame)
        require_columns(frame, schema, data.csv.name)
        train_raw = frame_to_dataset(train_frame, schema)
        holdout_raw = frame_to_dataset(frame.iloc[labelled[test_pos]], schema)

        summary = LoadSummary(
            rows_read=int(frame.shape[0]),
            rows_kept=train_raw.rows + holdout_raw.rows,
            skipped_labels=skipped_labels,
            skipped_features=train_raw.summary.skipped_features + holdout_raw.summary.skipped_features,
        )
        return train_raw, holdout_raw, schema, summary

    def load_holdout(self) -> Dataset:
        return load_arrays(self.run_dir, self.settings.HOLDOUT_STEM, norm_stats=self.load_norm_stats())

    def load_norm_stats(self) -> NormStats:
        path = self.run_dir / NORMALIZATION_FILE
        if not path.exists():
            raise DataError(f"No normalization stats in {self.run_dir}; run 'train' first")
        return NormStats.from_json(path.read_text(encoding="utf-8"))

    def load_schema(self) -> FeatureSchema:
        path = self.run_dir / SCHEMA_FILE
        if not path.exists():
            raise DataError(f"No resolved schema in {self.run_dir}; run 'train' first")
        return parse_schema_mapping(path).to_schema()

    def load_models(self) -> List[Model]:
        paths = sorted(self.models_dir.glob(f"*{self.settings.MODEL_FILE_SUFFIX}"))
        if not paths:
            raise DataError(f"No model files in {self.models_dir}; run 'train' first")
        return [load_model(path) for path in paths]

    # steps

    def train(self) -> TrainSummary:
        train_raw, holdout_raw, schema, load_summary = self.load_split()
        train = fit_normalize(train_raw)
        holdout = apply_normalize(holdout_raw, train.norm_stats)

        self.run_dir.mkdir(parents=True, exist_ok=True)
        (self.run_dir / RUN_CONFIG_FILE).write_text(format_run_config(self.config), encoding="utf-8")
        (self.run_dir / SCHEMA_FILE).write_text(format_schema(schema), encoding="utf-8")
        (self.run_dir / NORMALIZATION_FILE).write_text(train.norm_stats.to_json() + "\n", encoding="utf-8")
        save_arrays(holdout, self.run_dir, self.settings.HOLDOUT_STEM)

        cfg = self.config.train_config()
        trained = []
        for target in self.config.train.targets:
            for kind in self.config.train.kinds:
                model = train_model(kind, train, target, cfg)
                path = save_model(model, self.model_path(model))
                trained.append(TrainedModel(
                    name=model_name(model),
                    kind=kind.name,
                    target=target,
                    file=str(path.relative_to(self.run_dir)),
                    model_id=model_id(model),
                    size_bytes=model_size(model),
                ))

        summary = TrainSummary(
            created_at=utc_iso(),
            seed=self.config.seed,
            provenance=train_raw.provenance,
            rows_total=train.rows + holdout.rows,
            rows_train=train.rows,
            rows_holdout=holdout.rows,
            load_summary=_summary_counts(load_summary),
            models=trained,
        )
        write_json(self.run_dir / TRAIN_SUMMARY_FILE, summary.model_dump(mode="json"))
        logger.info(f"Trained {len(trained)} models into {self.run_dir}")
        return summary

    def evaluate(self) -> List[EvalReport]:
        holdout = self.load_holdout()
        reports = [evaluate(model, holdout, model.target) for model in self.load_models()]
        write_json(self.run_dir / EVAL_FILE, [r.model_dump(mode="json") for r in reports])
        return reports

    def load_reports(self) -> List[EvalReport]:
        return [EvalReport.model_validate(item) for item in read_json(self.run_dir / EVAL_FILE)]

    def select(self, use_fixture: bool = False) -> Dict[Target, SelectionResult]:
        reports = load_published_evaluations() if use_fixture else self.load_reports()
        results = select_per_target(reports, self.config.select)
        write_json(
            self.run_dir / SELECTION_FILE,
            {target.value: result.model_dump(mode="json") for target, result in results.items()},
        )
        return results

    def engines(self) -> List[EngineConfig]:
        """The sequential engine plus the configured one (when it is a dataflow engine)."""
        engines = [EngineConfig.sequential()]
        if self.config.engine.kind is EngineKind.DATAFLOW:
            engines.append(self.config.engine)
        return engines

    def bench(self, rows: Optional[int] = None, repetitions: Optional[int] = None) -> List[BenchResult]:
        holdout = self.load_holdout()
        workload = workload_of(holdout, rows or self.config.report.bench_rows)
        repetitions = repetitions or self.config.report.repetitions
        power = self.config.power

        results = []
        for model in self.load_models():
            if model.kind is not ModelKind.MLP:
                continue
            for engine in self.engines():
                sequential = engine.kind is EngineKind.SEQUENTIAL
                results.append(bench(
                    engine,
                    model,
                    workload,
                    repetitions=repetitions,
                    model_name=model_name(model),
                    power_watts=power.sequential_watts if sequential else power.dataflow_watts,
                    lut_count=power.sequential_lut if sequential else power.dataflow_lut,
                ))
        if not results:
            raise DataError("No MLP models to benchmark")
        write_json(self.run_dir / BENCH_FILE, [r.model_dump(mode="json") for r in results])
        return results

    def cost(
        self,
        reuse_factors: Optional[List[int]] = None,
        calibrate_on: Optional[Path] = None,
        free: Optional[List[str]] = None,
    ) -> CostSummary:
        section = self.config.cost
        constants = section.constants()
        calibration = None
        if free:
            calibration = calibrate(load_observations(calibrate_on), free, constants)
            constants = calibration.constants

        topologies = {target.value: MlpTopology.for_target(target) for target in Target}
        estimates = {name: estimate(topo, section.reuse_factor, constants) for name, topo in topologies.items()}
        summary = CostSummary(
            constants=constants,
            reuse_factor=section.reuse_factor,
            lut_capacity=section.lut_capacity,
            estimates=estimates,
            lut_usage_pct={
                name: utilization_ratio(est.lut, section.lut_capacity) for name, est in estimates.items()
            },
            sweep={
                name: sweep(topo, reuse_factors, constants) for name, topo in topologies.items()
            } if reuse_factors else {},
            calibration=calibration,
        )
        write_json(self.run_dir / COST_FILE, summary.model_dump(mode="json"))
        return summary


def _summary_counts(summary: Optional[LoadSummary]) -> Optional[Dict[str, int]]:
    if summary is None:
        return None
    return {
        "rows_read": summary.rows_read,
        "rows_kept": summary.rows_kept,
        "skipped_labels": summary.skipped_labels,
        "skipped_features": summary.skipped_features,
    }
