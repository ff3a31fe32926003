import logging
import statistics
import time
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from edgeids.app.core.errors import EmptyDatasetError, UsageError
from edgeids.app.costmodel.model import energy_efficiency, logic_density
from edgeids.app.data.dataset import Dataset
from edgeids.app.engines.config import EngineConfig
from edgeids.app.engines.dataflow import run_engine
from edgeids.app.models.mlp import MlpModel

logger = logging.getLogger("edgeids")

MIN_WORKLOAD_ROWS = 1000
MIN_REPETITIONS = 3


class BenchResult(BaseModel):
    model_name: str
    engine: EngineConfig
    packets_total: int = Field(gt=0)
    wall_seconds: float = Field(gt=0)
    throughput_pps: float = Field(gt=0)
    repetition_seconds: List[float] = Field(default_factory=list)
    power_watts: Optional[float] = None
    lut_count: Optional[int] = None
    efficiency_pps_per_watt: Optional[float] = None
    density_pps_per_lut: Optional[float] = None


def workload_of(ds: Dataset, rows: int) -> Dataset:
    """Tile `ds` cyclically to exactly `rows` rows."""
    if ds.rows == 0:
        raise EmptyDatasetError("Cannot build a workload from an empty dataset")
    return ds.subset(np.arange(rows) % ds.rows)


def bench(
    engine: EngineConfig,
    model: MlpModel,
    workload: Dataset,
    repetitions: int = MIN_REPETITIONS,
    model_name: Optional[str] = None,
    power_watts: Optional[float] = None,
    lut_count: Optional[int] = None,
) -> BenchResult:
    """
    Median wall-clock throughput over `repetitions` timed runs after one untimed
    warm-up run. Only inference is timed.
    """
    if workload.rows == 0:
        raise EmptyDatasetError("Cannot benchmark an empty workload")
    if workload.rows < MIN_WORKLOAD_ROWS:
        raise UsageError(f"Benchmark workload needs at least {MIN_WORKLOAD_ROWS} rows, got {workload.rows}")
    if repetitions < MIN_REPETITIONS:
        raise UsageError(f"Benchmark needs at least {MIN_REPETITIONS} repetitions, got {repetitions}")

    run_engine(model, workload, engine)

    timings = []
    for _ in range(repetitions):
        start = time.perf_counter()
        run_engine(model, workload, engine)
        timings.append(time.perf_counter() - start)

    wall = statistics.median(timings)
    throughput = workload.rows / wall
    name = model_name or f"MLP-{model.target.value}"

    result = BenchResult(
        model_name=name,
        engine=engine,
        packets_total=workload.rows,
        wall_seconds=wall,
        throughput_pps=throughput,
        repetition_seconds=timings,
        power_watts=power_watts,
        lut_count=lut_count,
        efficiency_pps_per_watt=energy_efficiency(throughput, power_watts) if power_watts else None,
        density_pps_per_lut=logic_density(throughput, lut_count) if lut_count else None,
    )
    logger.info(f"{name} on {engine.label}: {throughput:,.0f} pps (median of {repetitions}, {workload.rows} rows)")
    return result
