from edgeids.app.engines.bench import BenchResult, bench, workload_of
from edgeids.app.engines.config import EngineConfig, EngineKind, Predictions
from edgeids.app.engines.dataflow import run_dataflow, run_engine
from edgeids.app.engines.sequential import run_sequential

__all__ = [
    "BenchResult",
    "EngineConfig",
    "EngineKind",
    "Predictions",
    "bench",
    "run_dataflow",
    "run_engine",
    "run_sequential",
    "workload_of",
]
