import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from edgeids.app.core.errors import (
    ArityError,
    DataError,
    EmptyDatasetError,
    SchemaError,
    StratificationError,
)
from edgeids.app.data.labels import (
    CATEGORY_NAMES,
    SUBCATEGORY_NAMES,
    SUBCATEGORY_PARENT,
    LabelTriple,
    Target,
)
from edgeids.app.data.schema import LABEL_ROLES, FeatureSchema, Role, SchemaMapping

logger = logging.getLogger("edgeids")

# offending row indices kept in a LoadSummary for auditing
MAX_REPORTED_ROWS = 20


@dataclass(frozen=True)
class NormStats:
    """Per-feature (min, max) pairs of a min-max normalization."""
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if self.mins.shape != self.maxs.shape or self.mins.ndim != 1:
            raise DataError("Normalization stats need matching 1-D min and max vectors")
        if np.any(self.mins > self.maxs):
            raise DataError("Normalization stats violate min <= max")

    def __len__(self) -> int:
        return int(self.mins.shape[0])

    def to_json(self) -> str:
        return json.dumps({"min": self.mins.tolist(), "max": self.maxs.tolist()}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NormStats":
        payload = json.loads(text)
        return cls(
            mins=np.asarray(payload["min"], dtype=np.float64),
            maxs=np.asarray(payload["max"], dtype=np.float64),
        )


@dataclass(frozen=True)
class LoadSummary:
    rows_read: int
    rows_kept: int
    skipped_labels: int
    skipped_features: int
    bad_rows: Tuple[int, ...] = ()

    @property
    def skipped(self) -> int:
        return self.skipped_labels + self.skipped_features


@dataclass(frozen=True)
class Dataset:
    """
    Flow records as a float32 feature matrix (rows x 24) and an int label matrix
    whose columns are (attack, category, subcategory).
    """
    features: np.ndarray
    labels: np.ndarray
    norm_stats: Optional[NormStats] = None
    provenance: str = "csv"
    summary: Optional[LoadSummary] = None

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 2 or self.labels.shape[1] != 3:
            raise DataError("Dataset needs a 2-D feature matrix and a (rows x 3) label matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"Row mismatch: {self.features.shape[0]} feature rows vs {self.labels.shape[0]} labels"
            )
        if self.provenance not in ("csv", "synthetic"):
            raise DataError(f"Unknown provenance '{self.provenance}'")
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def rows(self) -> int:
        return int(self.features.shape[0])

    @property
    def is_normalized(self) -> bool:
        return self.norm_stats is not None

    def targets(self, target: Target) -> np.ndarray:
        return self.labels[:, target.column]

    def label_triples(self) -> List[LabelTriple]:
        return [LabelTriple(int(a), int(c), int(s)) for a, c, s in self.labels]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return replace(
            self,
            features=self.features[indices],
            labels=self.labels[indices],
            summary=None,
        )


def labels_from_subcategories(subcategories: np.ndarray) -> np.ndarray:
    sub = np.asarray(subcategories, dtype=np.int64)
    parent = np.asarray(SUBCATEGORY_PARENT, dtype=np.int64)
    return np.stack([(sub != 0).astype(np.int64), parent[sub], sub], axis=1)


def read_flow_csv(path: Path) -> pd.DataFrame:
    """Read a flow-record CSV once, every cell as a string, header names stripped."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"CSV file not found: {path}")
    frame = pd.read_csv(
        path,
        dtype=str,
        keep_default_na=False,
        encoding="utf-8",
        skipinitialspace=True,
    )
    frame.columns = [str(c).strip() for c in frame.columns]
    logger.info(f"Read {len(frame)} rows from {path}")
    return frame


def require_columns(frame: pd.DataFrame, schema: FeatureSchema, origin: str = "input") -> None:
    for name, role in schema.required_columns:
        if name not in frame.columns:
            raise SchemaError(f"{role.value} column absent: '{name}' not in {origin}")


def load_csv(path: Path, schema: FeatureSchema) -> Dataset:
    """
    Read a flow-record CSV through `schema`. Rows whose labels cannot be mapped or
    whose feature cells are not finite numbers are skipped and counted.
    """
    frame = read_flow_csv(path)
    require_columns(frame, schema, Path(path).name)
    return frame_to_dataset(frame[[name for name, _ in schema.required_columns]], schema)


def frame_to_features(frame: pd.DataFrame, schema: FeatureSchema) -> Tuple[np.ndarray, np.ndarray]:
    """Feature matrix (float64) of a string frame plus a mask of rows whose cells are all finite reals."""
    if len(frame) == 0:
        return np.empty((0, schema.feature_count)), np.zeros(0, dtype=bool)
    missing = [name for name in schema.feature_columns if name not in frame.columns]
    if missing:
        raise SchemaError(f"feature column absent: {missing[0]!r}")
    values = np.column_stack([
        pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=np.float64)
        for name in schema.feature_columns
    ])
    return values, np.isfinite(values).all(axis=1)


def decode_labels(
    frame: pd.DataFrame, schema: Union[FeatureSchema, SchemaMapping]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Subcategory ids (float64, NaN when unmapped) of a string frame plus a mask of
    rows whose (category, subcategory) spelling is known and agrees with the attack flag.
    Accepts an unresolved SchemaMapping as well.
    """
    for role in LABEL_ROLES:
        if schema.label_column(role) not in frame.columns:
            raise SchemaError(f"{role.value} column absent: '{schema.label_column(role)}'")
    categories = frame[schema.label_column(Role.LABEL_CATEGORY)].astype(str)
    subcategories = frame[schema.label_column(Role.LABEL_SUBCATEGORY)].astype(str)
    keys = categories.str.strip().str.lower() + "/" + subcategories.str.strip().str.lower()
    sub_ids = keys.map(schema.label_aliases).to_numpy(dtype=np.float64, na_value=np.nan)
    attack = pd.to_numeric(
        frame[schema.label_column(Role.LABEL_ATTACK)], errors="coerce"
    ).to_numpy(dtype=np.float64)
    label_ok = np.isfinite(sub_ids) & np.isfinite(attack)
    label_ok[label_ok] &= attack[label_ok] == (sub_ids[label_ok] != 0)
    return sub_ids, label_ok


def frame_to_dataset(frame: pd.DataFrame, schema: FeatureSchema) -> Dataset:
    """Decode an all-string frame (a CSV or a slice of its rows) into a Dataset, skipping bad rows."""
    rows_read = len(frame)

    # 1. labels: (category, subcategory) spelling table, then attack-flag consistency
    sub_ids, label_ok = decode_labels(frame, schema)

    # 2. features: every cell must parse to a finite real
    values, feature_ok = frame_to_features(frame, schema)

    keep = label_ok & feature_ok
    skipped_labels = int(np.count_nonzero(~label_ok))
    skipped_features = int(np.count_nonzero(label_ok & ~feature_ok))
    bad_rows = tuple(int(i) for i in np.flatnonzero(~keep)[:MAX_REPORTED_ROWS])
    if skipped_labels or skipped_features:
        logger.warning(
            f"Skipped {skipped_labels} rows with unmappable labels and "
            f"{skipped_features} rows with non-numeric features (first rows: {list(bad_rows)})"
        )

    summary = LoadSummary(
        rows_read=rows_read,
        rows_kept=int(np.count_nonzero(keep)),
        skipped_labels=skipped_labels,
        skipped_features=skipped_features,
        bad_rows=bad_rows,
    )
    return Dataset(
        features=values[keep].astype(np.float32),
        labels=labels_from_subcategories(sub_ids[keep].astype(np.int64)),
        provenance="csv",
        summary=summary,
    )


def _scale(features: np.ndarray, stats: NormStats) -> np.ndarray:
    span = stats.maxs - stats.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (features.astype(np.float64) - stats.mins) / safe
    scaled[:, span <= 0] = 0.0
    return np.clip(scaled, 0.0, 1.0).astype(np.float32)


def fit_normalize(ds: Dataset) -> Dataset:
    """Min-max scale every feature to [0, 1]; constant features map to 0."""
    if ds.rows == 0:
        raise EmptyDatasetError("Cannot fit normalization on an empty dataset")
    if ds.is_normalized:
        raise DataError("Dataset is already normalized")
    data = ds.features.astype(np.float64)
    stats = NormStats(mins=data.min(axis=0), maxs=data.max(axis=0))
    return replace(ds, features=_scale(ds.features, stats), norm_stats=stats)


def normalize_features(features: np.ndarray, stats: NormStats) -> np.ndarray:
    """Scale a raw feature matrix with stored stats; out-of-range values clamp to [0, 1]."""
    if features.ndim != 2 or len(stats) != features.shape[1]:
        raise ArityError(
            f"Normalization stats cover {len(stats)} features, input has shape {features.shape}"
        )
    return _scale(features, stats)


def apply_normalize(ds: Dataset, stats: NormStats) -> Dataset:
    """Apply stored stats to a raw dataset."""
    return replace(ds, features=normalize_features(ds.features, stats), norm_stats=stats)


def split_indices(subcategories: np.ndarray, train_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sorted (train, test) row indices: each subcategory class keeps `train_fraction`
    of its rows (rounded) in the training part.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")

    rng = np.random.default_rng(seed)
    subcategories = np.asarray(subcategories)
    train_parts, test_parts = [], []
    for class_id in np.unique(subcategories):
        members = np.flatnonzero(subcategories == class_id)
        if members.size < 2:
            raise StratificationError(
                f"Class {SUBCATEGORY_NAMES[int(class_id)]} has {members.size} row(s); "
                f"stratified split needs at least 2"
            )
        shuffled = rng.permutation(members)
        n_train = int(np.floor(members.size * train_fraction + 0.5))
        n_train = min(max(n_train, 1), members.size - 1)
        train_parts.append(shuffled[:n_train])
        test_parts.append(shuffled[n_train:])

    train_idx = np.sort(np.concatenate(train_parts)) if train_parts else np.empty(0, dtype=np.int64)
    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, dtype=np.int64)
    logger.info(f"Stratified split: {train_idx.size} train / {test_idx.size} test rows")
    return train_idx, test_idx


def stratified_split(ds: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Stratified partition of a dataset; both parts keep the original row order."""
    train_idx, test_idx = split_indices(ds.targets(Target.SUBCATEGORY), train_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


def save_arrays(ds: Dataset, directory: Path, stem: str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.save(directory / f"{stem}_features.npy", np.ascontiguousarray(ds.features))
    np.save(directory / f"{stem}_labels.npy", np.ascontiguousarray(ds.labels))


def load_arrays(directory: Path, stem: str, norm_stats: Optional[NormStats] = None,
                provenance: str = "csv") -> Dataset:
    directory = Path(directory)
    features_path = directory / f"{stem}_features.npy"
    if not features_path.exists():
        raise DataError(f"No saved dataset '{stem}' in {directory}")
    return Dataset(
        features=np.load(features_path),
        labels=np.load(directory / f"{stem}_labels.npy"),
        norm_stats=norm_stats,
        provenance=provenance,
    )


def write_csv(ds: Dataset, path: Path) -> None:
    """Export in the synthetic schema layout (`f00`..`f23`, attack, category, subcategory)."""
    frame = pd.DataFrame(
        ds.features.astype(np.float64),
        columns=[f"f{i:02d}" for i in range(ds.features.shape[1])],
    )
    frame["attack"] = ds.labels[:, 0]
    frame["category"] = [CATEGORY_NAMES[c] for c in ds.labels[:, 1]]
    frame["subcategory"] = [SUBCATEGORY_NAMES[s] for s in ds.labels[:, 2]]
    frame.to_csv(path, index=False, float_format="%.9g")
