from edgeids.app.costmodel.calibration import (
    CalibrationResult,
    Observation,
    calibrate,
    load_observations,
    residuals,
)
from edgeids.app.costmodel.model import (
    CostConstants,
    CostEstimate,
    PlatformCandidate,
    dsp_density,
    energy_efficiency,
    estimate,
    latency_model,
    logic_density,
    mac_count,
    recommend_platform,
    resource_estimate,
    sweep,
    utilization_ratio,
)

__all__ = [
    "CalibrationResult",
    "CostConstants",
    "CostEstimate",
    "Observation",
    "PlatformCandidate",
    "calibrate",
    "dsp_density",
    "energy_efficiency",
    "estimate",
    "latency_model",
    "load_observations",
    "logic_density",
    "mac_count",
    "recommend_platform",
    "residuals",
    "resource_estimate",
    "sweep",
    "utilization_ratio",
]
