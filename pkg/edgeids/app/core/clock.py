from datetime import datetime, timezone
from typing import Optional

_fixed_instant: Optional[datetime] = None


def freeze(instant: datetime | str | None) -> None:
    """Pin `utc_now()` to one instant (golden-file runs). `None` unfreezes."""
    global _fixed_instant
    if isinstance(instant, str):
        instant = datetime.fromisoformat(instant.replace("Z", "+00:00"))
    if instant is not None and instant.tzinfo is None:
        instant = instant.replace(tzinfo=timezone.utc)
    _fixed_instant = instant


def utc_now() -> datetime:
    if _fixed_instant is not None:
        return _fixed_instant
    return datetime.now(timezone.utc)


def utc_iso() -> str:
    return utc_now().astimezone(timezone.utc).isoformat().replace("+00:00", "Z")
