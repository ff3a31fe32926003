"""
Fit cost-model constants to measured designs.

Each measured quantity is linear in its own constants:
    lut        = lut_per_mac * sum(CU) + lut_per_softmax_class * K + lut_fixed
    dsp        = dsp_per_mac * sum(CU)
    f / tput   = core_interval + overhead_cycles
so every quantity is an independent non-negative least-squares problem over the
free constants it involves.
"""
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.optimize import nnls

from edgeids.app.core.config import get_settings
from edgeids.app.core.errors import CalibrationError, DataError
from edgeids.app.costmodel.model import (
    FITTABLE_CONSTANTS,
    CostConstants,
    compute_units,
    core_interval,
    dsp_value,
    latency_model,
    lut_value,
)
from edgeids.app.data.labels import Target
from edgeids.app.models.mlp import MlpTopology

logger = logging.getLogger("edgeids")

OBSERVATIONS_FIXTURE = "cost_observations.csv"

_QUANTITY_CONSTANTS = {
    "lut": ("lut_per_mac", "lut_per_softmax_class", "lut_fixed"),
    "dsp": ("dsp_per_mac",),
    "throughput_pps": ("overhead_cycles",),
}


class Observation(BaseModel):
    """One measured design: a model head (or dash-separated layer sizes) at a reuse factor."""
    model: str
    reuse_factor: int = Field(ge=1)
    lut: Optional[float] = None
    dsp: Optional[float] = None
    throughput_pps: Optional[float] = None

    @property
    def topology(self) -> MlpTopology:
        try:
            return MlpTopology.for_target(Target(self.model.strip().lower()))
        except ValueError:
            pass
        try:
            return MlpTopology(tuple(int(s) for s in self.model.split("-")))
        except ValueError:
            raise DataError(f"Observation model '{self.model}' is neither a target nor layer sizes")


class Residual(BaseModel):
    model: str
    reuse_factor: int
    quantity: str
    measured: float
    predicted: float
    relative_error: float


class CalibrationResult(BaseModel):
    constants: CostConstants
    free: List[str]
    residuals: List[Residual]

    @property
    def max_relative_error(self) -> float:
        return max((abs(r.relative_error) for r in self.residuals), default=0.0)


def _row(quantity: str, obs: Observation) -> Dict[str, float]:
    """Coefficient of every constant in the linear equation for one measurement."""
    topo = obs.topology
    units = float(sum(compute_units(topo, obs.reuse_factor)))
    if quantity == "lut":
        return {"lut_per_mac": units, "lut_per_softmax_class": float(topo.output_size), "lut_fixed": 1.0}
    if quantity == "dsp":
        return {"dsp_per_mac": units}
    return {"overhead_cycles": 1.0}


def _target_value(quantity: str, obs: Observation, f_clk_hz: float) -> float:
    if quantity == "throughput_pps":
        return f_clk_hz / obs.throughput_pps - max(core_interval(obs.topology, obs.reuse_factor), 1)
    return float(getattr(obs, quantity))


def predicted(quantity: str, obs: Observation, consts: CostConstants) -> float:
    if quantity == "lut":
        return lut_value(obs.topology, obs.reuse_factor, consts)
    if quantity == "dsp":
        return dsp_value(obs.topology, obs.reuse_factor, consts)
    return latency_model(obs.topology, obs.reuse_factor, consts)[1]


def residuals(observations: Sequence[Observation], consts: CostConstants) -> List[Residual]:
    out = []
    for obs in observations:
        for quantity in _QUANTITY_CONSTANTS:
            measured = getattr(obs, quantity)
            if measured is None:
                continue
            value = predicted(quantity, obs, consts)
            out.append(Residual(
                model=obs.model,
                reuse_factor=obs.reuse_factor,
                quantity=quantity,
                measured=measured,
                predicted=value,
                relative_error=(value - measured) / measured if measured else math.inf,
            ))
    return out


def calibrate(
    observations: Sequence[Observation],
    free: Sequence[str],
    base: Optional[CostConstants] = None,
) -> CalibrationResult:
    base = base or CostConstants()
    free = list(dict.fromkeys(free))
    unknown = [name for name in free if name not in FITTABLE_CONSTANTS]
    if unknown:
        raise CalibrationError(
            f"Cannot fit {unknown}; fittable constants are {', '.join(FITTABLE_CONSTANTS)}"
        )
    if not free:
        raise CalibrationError("No free constants to fit")
    if len(observations) < len(free):
        raise CalibrationError(
            f"Underdetermined: {len(observations)} observations for {len(free)} free constants"
        )

    fitted = base.model_dump()
    for quantity, names in _QUANTITY_CONSTANTS.items():
        unknowns = [name for name in names if name in free]
        if not unknowns:
            continue
        rows = [obs for obs in observations if getattr(obs, quantity) is not None]
        if len(rows) < len(unknowns):
            raise CalibrationError(
                f"Underdetermined: {len(rows)} {quantity} measurements for {unknowns}"
            )
        a = np.zeros((len(rows), len(unknowns)))
        b = np.zeros(len(rows))
        for i, obs in enumerate(rows):
            coefficients = _row(quantity, obs)
            b[i] = _target_value(quantity, obs, base.f_clk_hz)
            for name, coef in coefficients.items():
                if name in unknowns:
                    a[i, unknowns.index(name)] = coef
                else:
                    b[i] -= coef * fitted[name]
        if np.linalg.matrix_rank(a) < len(unknowns):
            raise CalibrationError(
                f"Underdetermined: {quantity} measurements cannot separate {unknowns}"
            )
        # solve on unit-scaled columns, then undo the scaling
        scale = np.abs(a).max(axis=0)
        solution, _ = nnls(a / scale, b)
        for name, value in zip(unknowns, solution / scale):
            fitted[name] = float(value)

    constants = CostConstants(**fitted)
    result = CalibrationResult(constants=constants, free=free, residuals=residuals(observations, constants))
    logger.info(
        f"Calibrated {free} on {len(observations)} observations "
        f"(max relative error {result.max_relative_error:.2%})"
    )
    return result


def _optional(value) -> Optional[float]:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return float(value)


def load_observations(path: Optional[Path] = None) -> List[Observation]:
    """CSV `model,reuse_factor,lut,dsp,throughput_pps`; measurement cells may be empty."""
    path = Path(path) if path else get_settings().fixture(OBSERVATIONS_FIXTURE)
    if not path.exists():
        raise DataError(f"Observation file not found: {path}")
    frame = pd.read_csv(path, dtype={"model": str})
    missing = {"model", "reuse_factor", "lut", "dsp", "throughput_pps"} - set(frame.columns)
    if missing:
        raise DataError(f"{path.name} lacks columns {sorted(missing)}")
    return [
        Observation(
            model=row.model,
            reuse_factor=int(row.reuse_factor),
            lut=_optional(row.lut),
            dsp=_optional(row.dsp),
            throughput_pps=_optional(row.throughput_pps),
        )
        for row in frame.itertuples(index=False)
    ]
