"""Published comparison tables shipped with the package."""
from pathlib import Path
from typing import List, Optional

import pandas as pd

from edgeids.app.core.config import get_settings
from edgeids.app.core.errors import DataError
from edgeids.app.costmodel.model import PlatformCandidate
from edgeids.app.evaluation.selection import ALGORITHM_FIXTURE

PLATFORM_FIXTURE = "platform_comparison.csv"
DESIGNS_FIXTURE = "fpga_designs.csv"

PLATFORM_COLUMNS = ["platform", "model", "throughput_pps", "efficiency_pps_per_watt", "density_pps_per_lut"]


def load_fixture_table(name: str, path: Optional[Path] = None) -> pd.DataFrame:
    """A fixture as an all-string frame, so cells are reproduced exactly as published."""
    path = Path(path) if path else get_settings().fixture(name)
    if not path.exists():
        raise DataError(f"Fixture not found: {path}")
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def published_candidates(path: Optional[Path] = None) -> List[PlatformCandidate]:
    """The published throughput/efficiency/density rows as platform candidates."""
    frame = load_fixture_table(PLATFORM_FIXTURE, path)
    missing = set(PLATFORM_COLUMNS) - set(frame.columns)
    if missing:
        raise DataError(f"{PLATFORM_FIXTURE} lacks columns {sorted(missing)}")
    return [
        PlatformCandidate(
            platform=row.platform,
            model=row.model,
            throughput_pps=float(row.throughput_pps),
            efficiency_pps_per_watt=float(row.efficiency_pps_per_watt),
            density_pps_per_lut=float(row.density_pps_per_lut),
        )
        for row in frame.itertuples(index=False)
    ]
