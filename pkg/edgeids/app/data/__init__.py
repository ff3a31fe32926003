from edgeids.app.data.dataset import (
    Dataset,
    LoadSummary,
    NormStats,
    apply_normalize,
    decode_labels,
    fit_normalize,
    frame_to_features,
    load_arrays,
    load_csv,
    normalize_features,
    read_flow_csv,
    save_arrays,
    split_indices,
    stratified_split,
)
from edgeids.app.data.labels import LabelTriple, Target
from edgeids.app.data.schema import FeatureSchema, Role, parse_schema_mapping, resolve_schema
from edgeids.app.data.synth import SynthSpec, synthesize

__all__ = [
    "Dataset",
    "FeatureSchema",
    "LabelTriple",
    "LoadSummary",
    "NormStats",
    "Role",
    "SynthSpec",
    "Target",
    "apply_normalize",
    "decode_labels",
    "fit_normalize",
    "frame_to_features",
    "load_arrays",
    "load_csv",
    "normalize_features",
    "parse_schema_mapping",
    "read_flow_csv",
    "resolve_schema",
    "save_arrays",
    "split_indices",
    "stratified_split",
    "synthesize",
]
