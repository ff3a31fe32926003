from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from edgeids.app.costmodel.model import CostEstimate  # noqa: E402


def plot_sweep(sweeps: Dict[str, List[CostEstimate]], path: Path) -> Path:
    """Modeled throughput and LUTs against reuse factor, one line per model head."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, (ax_pps, ax_lut) = plt.subplots(1, 2, figsize=(10, 4))
    for name, estimates in sweeps.items():
        factors = [e.reuse_factor for e in estimates]
        ax_pps.plot(factors, [e.throughput_pps for e in estimates], marker="o", label=name)
        ax_lut.plot(factors, [e.lut for e in estimates], marker="o", label=name)

    for ax, ylabel in ((ax_pps, "throughput (packets/s)"), (ax_lut, "LUTs")):
        ax.set_xscale("log", base=2)
        ax.set_xlabel("reuse factor")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
