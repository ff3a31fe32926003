"""
Per-run configuration.

The file format is line oriented:

    # comment
    seed = 42
    data.csv = data/botiot_train.csv
    mlp.epochs = 30

Top-level keys have no section. Relative paths resolve against the directory of
the configuration file.
"""
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from edgeids.app.core.errors import ConfigError
from edgeids.app.costmodel.model import DEFAULT_LUT_CAPACITY, CostConstants
from edgeids.app.data.labels import Target
from edgeids.app.engines.config import EngineConfig
from edgeids.app.evaluation.selection import SelectionRule
from edgeids.app.models.base import ModelKind
from edgeids.app.models.config import (
    ForestTrainConfig,
    MlpTrainConfig,
    NaiveBayesTrainConfig,
    SvmTrainConfig,
    TrainConfig,
    TreeTrainConfig,
)

logger = logging.getLogger("edgeids")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SynthWeights(str, Enum):
    UNIFORM = "uniform"
    IMBALANCED = "imbalanced"


class DataSection(_Section):
    """Input data. Without `csv` the run falls back to a synthetic dataset."""
    csv: Optional[Path] = None
    schema_file: Optional[Path] = None
    train_fraction: float = Field(default=0.8, gt=0, lt=1)
    synth_rows: int = Field(default=7000, ge=7)
    synth_separation: float = Field(default=4.0, ge=0)
    synth_interaction: bool = False
    synth_weights: SynthWeights = SynthWeights.IMBALANCED


class TrainSection(_Section):
    kinds: List[ModelKind] = Field(default_factory=lambda: list(ModelKind))
    targets: List[Target] = Field(default_factory=lambda: list(Target))

    @field_validator("kinds", mode="before")
    @classmethod
    def _parse_kinds(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [ModelKind.parse(part) for part in value.split(",") if part.strip()]
        return value

    @field_validator("targets", mode="before")
    @classmethod
    def _parse_targets(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [part.strip().lower() for part in value.split(",") if part.strip()]
        return value


class CostSection(CostConstants):
    reuse_factor: int = Field(default=4, ge=1)
    lut_capacity: int = Field(default=DEFAULT_LUT_CAPACITY, gt=0)

    def constants(self) -> CostConstants:
        return CostConstants(**self.model_dump(exclude={"reuse_factor", "lut_capacity"}))


class PowerSection(_Section):
    """Hardware figures for derived criteria of measured runs; power is never modeled."""
    sequential_watts: Optional[float] = Field(default=None, gt=0)
    dataflow_watts: Optional[float] = Field(default=None, gt=0)
    sequential_lut: Optional[int] = Field(default=None, gt=0)
    dataflow_lut: Optional[int] = Field(default=None, gt=0)


class ReportSection(_Section):
    required_pps: Optional[float] = Field(default=None, gt=0)
    bench_rows: int = Field(default=10_000, ge=1000)
    repetitions: int = Field(default=3, ge=3)


class RunConfig(_Section):
    seed: int = Field(ge=0, lt=2 ** 64)
    data: DataSection = DataSection()
    mlp: MlpTrainConfig = MlpTrainConfig()
    nb: NaiveBayesTrainConfig = NaiveBayesTrainConfig()
    tree: TreeTrainConfig = TreeTrainConfig()
    forest: ForestTrainConfig = ForestTrainConfig()
    svm: SvmTrainConfig = SvmTrainConfig()
    train: TrainSection = TrainSection()
    engine: EngineConfig = EngineConfig()
    cost: CostSection = CostSection()
    select: SelectionRule = SelectionRule()
    power: PowerSection = PowerSection()
    report: ReportSection = ReportSection()

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            mlp=self.mlp,
            nb=self.nb,
            tree=self.tree,
            forest=self.forest,
            svm=self.svm,
        )

    def check_paths(self) -> None:
        """Every referenced path must exist when a command starts."""
        for name in ("csv", "schema_file"):
            path = getattr(self.data, name)
            if path is not None and not path.exists():
                raise ConfigError(f"data.{name} does not exist: {path}")


_SECTIONS = {name for name, info in RunConfig.model_fields.items() if name != "seed"}
_PATH_KEYS = {("data", "csv"), ("data", "schema_file")}


def parse_run_config_text(text: str, base_dir: Optional[Path] = None, origin: str = "<config>",
                          overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    raw: Dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{line_no}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))

        if "." not in key:
            if key != "seed":
                raise ConfigError(f"{origin}:{line_no}: unknown top-level key '{key}'")
            raw["seed"] = value
            continue
        section, field = key.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigError(f"{origin}:{line_no}: unknown section '{section}'")
        section_model = RunConfig.model_fields[section].annotation
        if field not in section_model.model_fields:
            raise ConfigError(f"{origin}:{line_no}: unknown key '{key}'")
        if (section, field) in _PATH_KEYS and base_dir is not None and not Path(value).is_absolute():
            value = str((base_dir / value).resolve())
        raw.setdefault(section, {})[field] = value

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if "." in key:
            section, field = key.split(".", 1)
            raw.setdefault(section, {})[field] = value
        else:
            raw[key] = value

    if "seed" not in raw:
        raise ConfigError(f"{origin}: 'seed' is mandatory (set it in the file or pass --seed)")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{origin}: invalid run configuration: {exc}")


def load_run_config(path: Optional[Path], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read a run configuration file; `None` means defaults plus overrides."""
    if path is None:
        return parse_run_config_text("", overrides=overrides)
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Run configuration not found: {path}")
    config = parse_run_config_text(
        path.read_text(encoding="utf-8"),
        base_dir=path.parent,
        origin=str(path),
        overrides=overrides,
    )
    logger.info(f"Loaded run configuration {path} (seed {config.seed})")
    return config


def format_run_config(config: RunConfig) -> str:
    """Render every setting in the file format (written next to run outputs)."""
    lines = [f"seed = {config.seed}"]
    for section in sorted(_SECTIONS):
        values = getattr(config, section).model_dump(mode="json")
        for key in sorted(values):
            value = values[key]
            if value is None:
                continue
            if isinstance(value, list):
                value = ",".join(str(v.lower() if isinstance(v, str) else ModelKind(v).name.lower()) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{section}.{key} = {value}")
    return "\n".join(lines) + "\n"
