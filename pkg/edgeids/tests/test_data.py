import numpy as np
import pandas as pd
import pytest

from edgeids.app.core.errors import (
    ArityError,
    DataError,
    SchemaError,
    StratificationError,
)
from edgeids.app.data.dataset import (
    Dataset,
    NormStats,
    apply_normalize,
    decode_labels,
    fit_normalize,
    load_arrays,
    load_csv,
    normalize_features,
    save_arrays,
    split_indices,
    stratified_split,
    write_csv,
)
from edgeids.app.data.labels import SUBCATEGORY_NAMES, SUBCATEGORY_PARENT, LabelTriple, Target
from edgeids.app.data.schema import (
    FEATURE_COUNT,
    Role,
    format_schema,
    parse_schema_text,
    resolve_schema,
    synthetic_schema,
)
from edgeids.app.data.synth import IMBALANCED_CLASS_WEIGHTS, SynthSpec, synthesize


def test_label_hierarchy_is_consistent_on_synthetic_rows(synth_dataset):
    labels = synth_dataset.labels
    assert np.array_equal(labels[:, 0], (labels[:, 2] != 0).astype(labels.dtype))
    assert np.array_equal(labels[:, 1], np.asarray(SUBCATEGORY_PARENT)[labels[:, 2]])
    triple = LabelTriple.from_subcategory(SUBCATEGORY_NAMES.index("DoS_HTTP"))
    assert (triple.attack, triple.category_name) == (1, "DoS")


def test_label_triple_rejects_inconsistent_parent():
    with pytest.raises(DataError):
        LabelTriple(attack=1, category=2, subcategory=1)
    with pytest.raises(DataError):
        LabelTriple(attack=1, category=0, subcategory=0)


def test_synthesize_is_deterministic_per_seed():
    spec = SynthSpec(rows=500, seed=3)
    a, b = synthesize(spec), synthesize(spec)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    c = synthesize(SynthSpec(rows=500, seed=4))
    assert not np.array_equal(a.features, c.features)
    assert a.features.shape == (500, FEATURE_COUNT)
    assert a.provenance == "synthetic"


def test_synth_spec_validates_weights():
    with pytest.raises(ValueError):
        SynthSpec(rows=100, class_weights=[0.5, 0.5])
    with pytest.raises(ValueError):
        SynthSpec(rows=100, class_weights=[0.2] * 7)
    assert abs(sum(IMBALANCED_CLASS_WEIGHTS) - 1.0) < 1e-12


def test_interaction_marginals_do_not_identify_the_class():
    ds = synthesize(SynthSpec(rows=7000, seed=11, interaction=True))
    x = ds.features.astype(np.float64)
    sub = ds.labels[:, 2]
    # block 0 feature 0: its mean barely moves between Normal and the other classes
    spread = x[:, 0].std()
    gap = abs(x[sub == 0, 0].mean() - x[sub != 0, 0].mean())
    assert gap < 0.2 * spread


def test_fit_normalize_maps_to_unit_interval(synth_dataset):
    normalized = fit_normalize(synth_dataset)
    assert normalized.is_normalized
    assert normalized.features.min() >= 0.0
    assert normalized.features.max() <= 1.0
    assert np.allclose(normalized.features.min(axis=0), 0.0)
    assert np.allclose(normalized.features.max(axis=0), 1.0)
    with pytest.raises(DataError):
        fit_normalize(normalized)


def _raw(column):
    features = np.tile(np.asarray(column, dtype=np.float32)[:, None], (1, FEATURE_COUNT))
    labels = np.zeros((len(column), 3), dtype=np.int64)
    return Dataset(features=features, labels=labels, provenance="synthetic")


def test_fit_normalize_scales_a_column_linearly():
    normalized = fit_normalize(_raw([2.0, 4.0, 6.0]))
    assert normalized.features[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert fit_normalize(_raw([5.0, 5.0, 5.0])).features[:, 0].tolist() == [0.0, 0.0, 0.0]


def test_normalization_is_idempotent(synth_dataset):
    normalized = fit_normalize(synth_dataset)
    again = apply_normalize(synth_dataset, normalized.norm_stats)
    assert np.allclose(again.features, normalized.features, atol=1e-6)

    refit = fit_normalize(Dataset(features=normalized.features.copy(), labels=synth_dataset.labels.copy(),
                                  provenance="synthetic"))
    assert np.allclose(refit.features, normalized.features, atol=1e-6)


def test_apply_normalize_clamps_and_handles_constant_features():
    stats = NormStats(mins=np.zeros(FEATURE_COUNT), maxs=np.r_[np.full(FEATURE_COUNT - 1, 10.0), 0.0])
    raw = np.full((2, FEATURE_COUNT), 5.0)
    raw[1, 0] = 50.0
    scaled = normalize_features(raw, stats)
    assert scaled.dtype == np.float32
    assert scaled[0, 0] == pytest.approx(0.5)
    assert scaled[1, 0] == 1.0
    assert np.all(scaled[:, -1] == 0.0)
    with pytest.raises(ArityError):
        normalize_features(raw[:, :5], stats)


def test_norm_stats_json_round_trip(split):
    train, _ = split
    restored = NormStats.from_json(train.norm_stats.to_json())
    assert np.array_equal(restored.mins, train.norm_stats.mins)
    assert np.array_equal(restored.maxs, train.norm_stats.maxs)


def test_stratified_split_keeps_class_proportions(synth_dataset):
    train, test = stratified_split(synth_dataset, 0.8, seed=1)
    assert train.rows + test.rows == synth_dataset.rows
    sub = synth_dataset.targets(Target.SUBCATEGORY)
    for class_id in np.unique(sub):
        total = int(np.count_nonzero(sub == class_id))
        kept = int(np.count_nonzero(train.targets(Target.SUBCATEGORY) == class_id))
        assert abs(kept - 0.8 * total) <= 1
    again, _ = stratified_split(synth_dataset, 0.8, seed=1)
    assert np.array_equal(train.features, again.features)


def test_stratified_split_rejects_singleton_class(synth_dataset):
    keep = np.r_[np.flatnonzero(synth_dataset.labels[:, 2] != 6), np.flatnonzero(synth_dataset.labels[:, 2] == 6)[:1]]
    with pytest.raises(StratificationError):
        stratified_split(synth_dataset.subset(np.sort(keep)), 0.8, seed=0)
    with pytest.raises(DataError):
        stratified_split(synth_dataset, 1.0, seed=0)


def test_load_csv_skips_and_counts_bad_rows(tmp_path, synth_dataset):
    path = tmp_path / "flows.csv"
    write_csv(synth_dataset.subset(np.arange(50)), path)
    frame = pd.read_csv(path, dtype=str)
    frame.loc[3, "f05"] = "not-a-number"
    frame.loc[7, "subcategory"] = "Mystery"
    frame.to_csv(path, index=False)

    ds = load_csv(path, synthetic_schema())
    assert ds.rows == 48
    assert ds.summary.rows_read == 50
    assert ds.summary.skipped_labels == 1
    assert ds.summary.skipped_features == 1
    assert ds.summary.bad_rows == (3, 7)
    assert np.array_equal(ds.labels, np.delete(synth_dataset.labels[:50], [3, 7], axis=0))


def test_load_csv_missing_column_is_a_schema_error(tmp_path, synth_dataset):
    path = tmp_path / "flows.csv"
    write_csv(synth_dataset.subset(np.arange(10)), path)
    pd.read_csv(path).drop(columns=["f10"]).to_csv(path, index=False)
    with pytest.raises(SchemaError):
        load_csv(path, synthetic_schema())


def test_schema_mapping_ranks_candidates_by_variance():
    lines = [f"c{i} = candidate" for i in range(26)]
    lines += ["flag = label-attack", "cat = label-category", "sub = label-subcategory", "id = ignore"]
    lines += ["label:ddos/udp = DoS_TCP"]
    mapping = parse_schema_text("\n".join(lines))
    frame = pd.DataFrame({f"c{i}": [str(i * v) for v in (0.0, 1.0, 2.0)] for i in range(26)})

    schema = resolve_schema(mapping, frame)
    assert schema.feature_count == FEATURE_COUNT
    # the two lowest-variance candidates (c0, c1) are the ones dropped
    assert "c0" not in schema.feature_columns and "c1" not in schema.feature_columns
    assert schema.decode_subcategory("DDoS", "UDP") == 1
    assert dict(schema.columns)["c0"] is Role.IGNORE

    restored = parse_schema_text(format_schema(schema)).to_schema()
    assert restored.columns == schema.columns
    assert restored.decode_subcategory("ddos", "udp") == 1


def test_schema_errors():
    with pytest.raises(SchemaError):
        parse_schema_text("a = bogus-role")
    with pytest.raises(SchemaError):
        parse_schema_text("no equals sign")
    too_few = parse_schema_text("a = feature\nflag = label-attack\ncat = label-category\nsub = label-subcategory")
    with pytest.raises(SchemaError):
        too_few.to_schema()


def test_save_and_load_arrays(tmp_path, split):
    _, holdout = split
    save_arrays(holdout, tmp_path, "holdout")
    restored = load_arrays(tmp_path, "holdout", norm_stats=holdout.norm_stats)
    assert np.array_equal(restored.features, holdout.features)
    assert np.array_equal(restored.labels, holdout.labels)
    with pytest.raises(DataError):
        load_arrays(tmp_path, "missing")


def test_apply_normalize_requires_matching_width(synth_dataset):
    stats = NormStats(mins=np.zeros(3), maxs=np.ones(3))
    with pytest.raises(ArityError):
        apply_normalize(synth_dataset, stats)


def test_load_csv_reads_the_file_once(tmp_path, synth_dataset, monkeypatch):
    path = tmp_path / "flows.csv"
    write_csv(synth_dataset.subset(np.arange(30)), path)
    calls = []
    read_csv = pd.read_csv

    def counting(*args, **kwargs):
        calls.append(args[0] if args else kwargs.get("filepath_or_buffer"))
        return read_csv(*args, **kwargs)

    monkeypatch.setattr(pd, "read_csv", counting)
    ds = load_csv(path, synthetic_schema())
    assert ds.rows == 30
    assert len(calls) == 1


def test_split_indices_agrees_with_stratified_split(synth_dataset):
    train_idx, test_idx = split_indices(synth_dataset.labels[:, 2], 0.8, seed=3)
    train, test = stratified_split(synth_dataset, 0.8, seed=3)
    assert np.array_equal(train.labels, synth_dataset.labels[train_idx])
    assert np.array_equal(test.features, synth_dataset.features[test_idx])
    assert np.intersect1d(train_idx, test_idx).size == 0
    assert train_idx.size + test_idx.size == synth_dataset.rows


def test_decode_labels_accepts_an_unresolved_mapping():
    mapping = parse_schema_text("c0 = candidate\nflag = label-attack\ncat = label-category\nsub = label-subcategory")
    frame = pd.DataFrame({
        "flag": ["0", "1", "1", "x"],
        "cat": ["Normal", "DoS", "DoS", "DoS"],
        "sub": ["Normal", "HTTP", "Mystery", "TCP"],
    })
    sub_ids, label_ok = decode_labels(frame, mapping)
    assert label_ok.tolist() == [True, True, False, False]
    assert sub_ids[:2].tolist() == [0.0, 2.0]
    with pytest.raises(SchemaError):
        decode_labels(frame.drop(columns=["cat"]), mapping)
