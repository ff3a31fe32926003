from pathlib import Path
from typing import List, Optional

from edgeids.app.core.errors import UsageError
from edgeids.app.costmodel.plot import plot_sweep
from edgeids.app.services.pipeline import PipelineService

DEFAULT_FREE = "lut_per_softmax_class,lut_fixed"


def _int_list(text: Optional[str]) -> Optional[List[int]]:
    if not text:
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"--reuse-factors expects a comma list of integers, got '{text}'")


def handle(args, service: PipelineService) -> int:
    reuse_factors = _int_list(args.reuse_factors)
    if args.plot and not reuse_factors:
        raise UsageError("--plot needs --reuse-factors")
    free = None
    calibrate_on = None
    if args.calibrate is not None:
        free = [name.strip() for name in args.free.split(",") if name.strip()]
        calibrate_on = Path(args.calibrate) if args.calibrate else None

    summary = service.cost(reuse_factors=reuse_factors, calibrate_on=calibrate_on, free=free)

    print(f"{'model':<12} {'rf':>3} {'ii':>7} {'pps':>12} {'dsp':>6} {'lut':>8} {'usage%':>7}")
    for name, est in summary.estimates.items():
        print(f"{name:<12} {est.reuse_factor:>3} {est.ii_cycles:>7.1f} {est.throughput_pps:>12,.0f} "
              f"{est.dsp:>6} {est.lut:>8} {summary.lut_usage_pct[name]:>7.1f}")
    if summary.calibration:
        for r in summary.calibration.residuals:
            print(f"  {r.model:<12} {r.quantity:<15} measured {r.measured:>12,.1f} "
                  f"predicted {r.predicted:>12,.1f} ({r.relative_error:+.2%})")
    if args.plot:
        print(plot_sweep(summary.sweep, Path(args.plot)))
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("cost", help="Cost-model estimates, reuse-factor sweeps and calibration")
    parser.add_argument("--reuse-factors", help="Comma list of reuse factors to sweep, e.g. 1,2,4,8,16")
    parser.add_argument("--calibrate", nargs="?", const="", default=None,
                        help="Fit free constants on an observation CSV (shipped measurements when no path)")
    parser.add_argument("--free", default=DEFAULT_FREE, help="Comma list of constants to fit")
    parser.add_argument("--plot", help="PNG path for the sweep figure")
    parser.set_defaults(handler=handle)
