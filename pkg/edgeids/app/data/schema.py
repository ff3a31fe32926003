"""
Feature schema: which CSV columns feed the 24 model inputs and which carry the labels.

The mapping file is line oriented:

    # comment
    source_column = role
    label:<category>/<subcategory> = <canonical subcategory>

Roles are feature, candidate, ignore, label-attack, label-category and
label-subcategory. `candidate` columns are ranked by variance when the mapping is
resolved against training data.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from edgeids.app.core.errors import SchemaError
from edgeids.app.data.labels import CATEGORY_NAMES, SUBCATEGORY_NAMES, SUBCATEGORY_PARENT

logger = logging.getLogger("edgeids")

FEATURE_COUNT = 24
LABEL_PREFIX = "label:"


class Role(str, Enum):
    FEATURE = "feature"
    CANDIDATE = "candidate"
    IGNORE = "ignore"
    LABEL_ATTACK = "label-attack"
    LABEL_CATEGORY = "label-category"
    LABEL_SUBCATEGORY = "label-subcategory"


LABEL_ROLES = (Role.LABEL_ATTACK, Role.LABEL_CATEGORY, Role.LABEL_SUBCATEGORY)


def _label_column(columns: Tuple[Tuple[str, Role], ...], role: Role) -> str:
    for name, r in columns:
        if r is role:
            return name
    raise SchemaError(f"{role.value} column absent from schema")


def default_label_aliases() -> Dict[str, int]:
    """Spellings used by the BOT-IoT CSV subsets, keyed `category/subcategory` in lower case."""
    aliases = {
        "normal/normal": 0,
        "dos/tcp": 1,
        "dos/http": 2,
        "reconnaissance/service_scan": 3,
        "reconnaissance/os_fingerprint": 4,
        "theft/keylogging": 5,
        "theft/data_exfiltration": 6,
    }
    # canonical names written by this toolkit (synthetic exports, detect inputs)
    for sub_id, name in enumerate(SUBCATEGORY_NAMES):
        category = CATEGORY_NAMES[SUBCATEGORY_PARENT[sub_id]]
        aliases[f"{category.lower()}/{name.lower()}"] = sub_id
    return aliases


@dataclass(frozen=True)
class FeatureSchema:
    columns: Tuple[Tuple[str, Role], ...]
    label_aliases: Mapping[str, int] = field(default_factory=default_label_aliases)

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise SchemaError(f"Duplicate source columns in schema: {', '.join(duplicates)}")
        if self.feature_count != FEATURE_COUNT:
            raise SchemaError(
                f"Schema must select exactly {FEATURE_COUNT} feature columns, got {self.feature_count}"
            )
        for role in LABEL_ROLES:
            count = sum(1 for _, r in self.columns if r is role)
            if count != 1:
                raise SchemaError(f"Schema needs exactly one {role.value} column, got {count}")
        if any(r is Role.CANDIDATE for _, r in self.columns):
            raise SchemaError("Unresolved candidate columns; call resolve_schema first")

    @property
    def feature_count(self) -> int:
        return sum(1 for _, role in self.columns if role is Role.FEATURE)

    @property
    def feature_columns(self) -> List[str]:
        return [name for name, role in self.columns if role is Role.FEATURE]

    def label_column(self, role: Role) -> str:
        return _label_column(self.columns, role)

    @property
    def required_columns(self) -> List[Tuple[str, Role]]:
        return [(name, role) for name, role in self.columns if role is not Role.IGNORE]

    def decode_subcategory(self, category: str, subcategory: str) -> Optional[int]:
        key = f"{category.strip().lower()}/{subcategory.strip().lower()}"
        return self.label_aliases.get(key)


@dataclass(frozen=True)
class SchemaMapping:
    """A parsed mapping file; may still contain `candidate` columns."""
    columns: Tuple[Tuple[str, Role], ...]
    label_aliases: Mapping[str, int]

    def label_column(self, role: Role) -> str:
        return _label_column(self.columns, role)

    def to_schema(self) -> FeatureSchema:
        return FeatureSchema(columns=self.columns, label_aliases=self.label_aliases)


def parse_schema_text(text: str, origin: str = "<schema>") -> SchemaMapping:
    columns: List[Tuple[str, Role]] = []
    aliases: Dict[str, int] = default_label_aliases()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"{origin}:{line_no}: expected 'source_column = role'")
        left, right = (part.strip() for part in line.split("=", 1))

        if left.lower().startswith(LABEL_PREFIX):
            key = left[len(LABEL_PREFIX):].strip().lower()
            if "/" not in key:
                raise SchemaError(f"{origin}:{line_no}: label key must be 'category/subcategory'")
            canonical = {name.lower(): i for i, name in enumerate(SUBCATEGORY_NAMES)}
            if right.lower() not in canonical:
                raise SchemaError(f"{origin}:{line_no}: unknown subcategory '{right}'")
            aliases[key] = canonical[right.lower()]
            continue

        try:
            role = Role(right.lower())
        except ValueError:
            raise SchemaError(f"{origin}:{line_no}: unknown role '{right}'")
        columns.append((left, role))

    return SchemaMapping(columns=tuple(columns), label_aliases=aliases)


def parse_schema_mapping(path: Path) -> SchemaMapping:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"Schema file not found: {path}")
    return parse_schema_text(path.read_text(encoding="utf-8"), origin=str(path))


def resolve_schema(mapping: SchemaMapping, frame: pd.DataFrame, count: int = FEATURE_COUNT) -> FeatureSchema:
    """
    Turn a mapping into a FeatureSchema: explicit `feature` columns are kept and
    the remaining slots go to the highest-variance `candidate` columns of `frame`.
    Pass the training rows only; holdout rows must not influence the selection.
    """
    explicit = [name for name, role in mapping.columns if role is Role.FEATURE]
    candidates = [name for name, role in mapping.columns if role is Role.CANDIDATE]
    if len(explicit) > count:
        raise SchemaError(f"Mapping selects {len(explicit)} features, more than {count}")

    slots = count - len(explicit)
    ranked: List[Tuple[float, str]] = []
    for name in candidates:
        if name not in frame.columns:
            logger.warning(f"Candidate column '{name}' absent from data; skipping")
            continue
        values = pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=np.float64)
        values = values[np.isfinite(values)]
        if values.size == 0:
            continue
        ranked.append((float(np.var(values)), name))
    ranked.sort(key=lambda item: (-item[0], item[1]))

    if len(ranked) < slots:
        raise SchemaError(
            f"Only {len(explicit) + len(ranked)} usable feature columns, {count} required"
        )
    chosen = set(explicit) | {name for _, name in ranked[:slots]}
    logger.info(f"Resolved schema: {len(explicit)} explicit + {slots} variance-ranked features")

    columns = []
    for name, role in mapping.columns:
        if role is Role.CANDIDATE:
            role = Role.FEATURE if name in chosen else Role.IGNORE
        columns.append((name, role))
    return FeatureSchema(columns=tuple(columns), label_aliases=mapping.label_aliases)


def format_schema(schema: FeatureSchema) -> str:
    """Render a resolved schema in the mapping-file format."""
    lines = ["# resolved feature schema"]
    lines += [f"{name} = {role.value}" for name, role in schema.columns]
    defaults = default_label_aliases()
    for key in sorted(schema.label_aliases):
        if defaults.get(key) == schema.label_aliases[key]:
            continue
        lines.append(f"{LABEL_PREFIX}{key} = {SUBCATEGORY_NAMES[schema.label_aliases[key]]}")
    return "\n".join(lines) + "\n"


def synthetic_schema() -> FeatureSchema:
    """Schema of CSVs exported from synthetic datasets (`f00`..`f23` + label names)."""
    columns = [(f"f{i:02d}", Role.FEATURE) for i in range(FEATURE_COUNT)]
    columns += [
        ("attack", Role.LABEL_ATTACK),
        ("category", Role.LABEL_CATEGORY),
        ("subcategory", Role.LABEL_SUBCATEGORY),
    ]
    return FeatureSchema(columns=tuple(columns))
