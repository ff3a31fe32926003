"""
First-order cost model of a reuse-factor dataflow MLP accelerator.

Every dense layer gets ceil(macs / reuse_factor) compute units. Area scales with
the number of compute units, the unrolled softmax adds a per-class LUT term, and
the initiation interval is the reuse factor of the slowest dense stage plus a
fixed streaming/softmax overhead.
"""
import math
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from edgeids.app.core.errors import DataError, UsageError
from edgeids.app.models.mlp import MlpTopology

# LUTs of the Zynq UltraScale+ xczu7ev used for the published dataflow designs
DEFAULT_LUT_CAPACITY = 230_400

FITTABLE_CONSTANTS = (
    "dsp_per_mac",
    "lut_per_mac",
    "lut_per_softmax_class",
    "lut_fixed",
    "overhead_cycles",
)


class CostConstants(BaseModel):
    """
    Defaults: 100 MHz clock, 5 DSPs per float32 MAC unit, LUT terms least-squares
    fitted to the three published dataflow designs at reuse factor 4, and the
    overhead that turns an interval of 4 cycles into the published 1,166,861 pps.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    f_clk_hz: float = Field(default=100e6, gt=0)
    dsp_per_mac: float = Field(default=5.0, ge=0)
    lut_per_mac: float = Field(default=20.0, ge=0)
    lut_per_softmax_class: float = Field(default=1364.34, ge=0)
    lut_fixed: float = Field(default=29139.18, ge=0)
    overhead_cycles: float = Field(default=81.7, ge=0)


class ResourceEstimate(BaseModel):
    compute_units: List[int]
    dsp: int
    lut: int
    bram_bits: int


class CostEstimate(BaseModel):
    layer_sizes: List[int]
    reuse_factor: int
    per_layer_macs: List[int]
    compute_units: List[int]
    ii_cycles: float
    throughput_pps: float
    dsp: int
    lut: int
    bram_bits: int


TopologyLike = Union[MlpTopology, Sequence[int]]


def _topology(topology: TopologyLike) -> MlpTopology:
    return topology if isinstance(topology, MlpTopology) else MlpTopology(tuple(topology))


def _check_reuse_factor(reuse_factor: int) -> None:
    if int(reuse_factor) != reuse_factor or reuse_factor < 1:
        raise UsageError(f"reuse factor must be a positive integer, got {reuse_factor}")


def mac_count(topology: TopologyLike) -> List[int]:
    sizes = _topology(topology).layer_sizes
    return [fan_in * out for fan_in, out in zip(sizes[:-1], sizes[1:])]


def compute_units(topology: TopologyLike, reuse_factor: int) -> List[int]:
    _check_reuse_factor(reuse_factor)
    return [math.ceil(macs / reuse_factor) for macs in mac_count(topology)]


def lut_value(topology: TopologyLike, reuse_factor: int, consts: CostConstants) -> float:
    """Unrounded LUT estimate."""
    topo = _topology(topology)
    return (consts.lut_per_mac * sum(compute_units(topo, reuse_factor))
            + consts.lut_per_softmax_class * topo.output_size
            + consts.lut_fixed)


def dsp_value(topology: TopologyLike, reuse_factor: int, consts: CostConstants) -> float:
    return consts.dsp_per_mac * sum(compute_units(topology, reuse_factor))


def resource_estimate(topology: TopologyLike, reuse_factor: int, consts: Optional[CostConstants] = None) -> ResourceEstimate:
    consts = consts or CostConstants()
    topo = _topology(topology)
    return ResourceEstimate(
        compute_units=compute_units(topo, reuse_factor),
        dsp=int(round(dsp_value(topo, reuse_factor, consts))),
        lut=int(round(lut_value(topo, reuse_factor, consts))),
        # every weight and bias resident on chip as float32
        bram_bits=32 * topo.parameter_count,
    )


def core_interval(topology: TopologyLike, reuse_factor: int) -> int:
    """Cycles per input of the slowest dense stage: the reuse factor, or the stage's MAC count when smaller."""
    _check_reuse_factor(reuse_factor)
    return max(min(reuse_factor, macs) for macs in mac_count(topology))


def latency_model(topology: TopologyLike, reuse_factor: int, consts: Optional[CostConstants] = None):
    """(ii_cycles, throughput_pps); the unrolled softmax stage takes one cycle and never dominates."""
    consts = consts or CostConstants()
    ii = max(core_interval(topology, reuse_factor), 1) + consts.overhead_cycles
    return ii, consts.f_clk_hz / ii


def estimate(topology: TopologyLike, reuse_factor: int, consts: Optional[CostConstants] = None) -> CostEstimate:
    consts = consts or CostConstants()
    topo = _topology(topology)
    resources = resource_estimate(topo, reuse_factor, consts)
    ii, throughput = latency_model(topo, reuse_factor, consts)
    return CostEstimate(
        layer_sizes=list(topo.layer_sizes),
        reuse_factor=reuse_factor,
        per_layer_macs=mac_count(topo),
        compute_units=resources.compute_units,
        ii_cycles=ii,
        throughput_pps=throughput,
        dsp=resources.dsp,
        lut=resources.lut,
        bram_bits=resources.bram_bits,
    )


def sweep(topology: TopologyLike, reuse_factors: Sequence[int], consts: Optional[CostConstants] = None) -> List[CostEstimate]:
    return [estimate(topology, rf, consts) for rf in reuse_factors]


def energy_efficiency(throughput_pps: float, power_watts: float) -> float:
    """Packets/sec/W."""
    if power_watts <= 0:
        raise DataError(f"Power must be positive, got {power_watts}")
    return throughput_pps / power_watts


def logic_density(throughput_pps: float, lut_count: float) -> float:
    """Packets/sec per LUT."""
    if lut_count <= 0:
        raise DataError(f"LUT count must be positive, got {lut_count}")
    return throughput_pps / lut_count


def dsp_density(throughput_pps: float, dsp_count: float) -> float:
    """Packets/sec per DSP."""
    if dsp_count <= 0:
        raise DataError(f"DSP count must be positive, got {dsp_count}")
    return throughput_pps / dsp_count


def utilization_ratio(used: float, capacity: float = DEFAULT_LUT_CAPACITY) -> float:
    """Percent of the device's resource in use."""
    if capacity <= 0:
        raise DataError(f"Capacity must be positive, got {capacity}")
    return 100.0 * used / capacity


class PlatformCandidate(BaseModel):
    platform: str
    model: str
    throughput_pps: float = Field(gt=0)
    efficiency_pps_per_watt: Optional[float] = None
    density_pps_per_lut: Optional[float] = None


def recommend_platform(candidates: Sequence[PlatformCandidate], required_pps: float) -> Optional[PlatformCandidate]:
    """
    The candidate that sustains `required_pps` with the best energy efficiency
    (then throughput, then name); None when no candidate is fast enough.
    """
    eligible = [c for c in candidates if c.throughput_pps >= required_pps]
    if not eligible:
        return None
    return min(
        eligible,
        key=lambda c: (
            -(c.efficiency_pps_per_watt if c.efficiency_pps_per_watt is not None else -math.inf),
            -c.throughput_pps,
            c.platform,
            c.model,
        ),
    )
