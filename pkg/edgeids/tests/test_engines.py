import statistics
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from pydantic import ValidationError

from edgeids.app.core.errors import DataError, EmptyDatasetError, UsageError
from edgeids.app.data.labels import Target
from edgeids.app.engines import EngineConfig, EngineKind, bench, run_dataflow, run_engine, run_sequential, workload_of
from edgeids.app.models.base import ModelKind
from edgeids.app.models.zoo import predict_batch, train_model


@pytest.fixture(scope="module")
def workload(split):
    _, holdout = split
    return workload_of(holdout, 10_000)


@pytest.fixture(scope="module")
def reference(trained_heads, workload):
    return run_sequential(trained_heads[Target.SUBCATEGORY], workload)


def _dataflow(lanes, queue_depth=8, reuse_factor=4):
    return EngineConfig(kind=EngineKind.DATAFLOW, lanes=lanes, queue_depth=queue_depth, reuse_factor=reuse_factor)


MAX_LANES = 16
MAX_QUEUE_DEPTH = 64
RUN_TIMEOUT_SECONDS = 60


def _sampled_grid(count=12, seed=2024):
    """Corners of the (lanes, queue_depth) grid plus a seeded sample of interior points."""
    rng = np.random.default_rng(seed)
    corners = [(1, 1), (1, MAX_QUEUE_DEPTH), (MAX_LANES, 1), (MAX_LANES, MAX_QUEUE_DEPTH)]
    sample = zip(rng.integers(1, MAX_LANES + 1, size=count).tolist(),
                 rng.integers(1, MAX_QUEUE_DEPTH + 1, size=count).tolist())
    return corners + sorted(set(sample) - set(corners))


def _run_with_timeout(model, stream, cfg):
    """run_dataflow on a helper thread; a stuck pipeline fails the test instead of hanging it."""
    pool = ThreadPoolExecutor(max_workers=1)
    try:
        return pool.submit(run_dataflow, model, stream, cfg).result(timeout=RUN_TIMEOUT_SECONDS)
    finally:
        pool.shutdown(wait=False)


@pytest.mark.parametrize("lanes", [1, 2, 4, 8])
def test_dataflow_matches_sequential_bit_for_bit(trained_heads, workload, reference, lanes):
    result = run_dataflow(trained_heads[Target.SUBCATEGORY], workload, _dataflow(lanes))
    assert len(result) == workload.rows
    assert np.array_equal(result.class_ids, reference.class_ids)
    assert result.scores.tobytes() == reference.scores.tobytes()


@pytest.mark.parametrize("queue_depth", [1, 2, 16])
@pytest.mark.parametrize("reuse_factor", [1, 7])
def test_queue_depth_and_chunking_do_not_change_results(trained_heads, workload, reference, queue_depth, reuse_factor):
    cfg = _dataflow(3, queue_depth=queue_depth, reuse_factor=reuse_factor)
    result = run_dataflow(trained_heads[Target.SUBCATEGORY], workload, cfg)
    assert result.scores.tobytes() == reference.scores.tobytes()


def test_engines_agree_with_predict_batch(trained_heads, split):
    _, holdout = split
    model = trained_heads[Target.ATTACK]
    ids, scores = predict_batch(model, holdout.features)
    for cfg in (EngineConfig.sequential(), _dataflow(2)):
        result = run_engine(model, holdout, cfg)
        assert np.array_equal(result.class_ids, ids)
        assert np.array_equal(result.scores, scores)


def test_empty_input(trained_heads):
    model = trained_heads[Target.ATTACK]
    for cfg in (EngineConfig.sequential(), _dataflow(4)):
        result = run_engine(model, np.empty((0, 24), dtype=np.float32), cfg)
        assert len(result) == 0
        assert result.scores.shape == (0, 2)


def test_engine_config_validation():
    assert EngineConfig.model_validate({"kind": "sequential"}).lanes == 1
    assert EngineConfig().chunk_rows == 16
    with pytest.raises(ValidationError):
        EngineConfig(kind=EngineKind.SEQUENTIAL, lanes=2)
    with pytest.raises(ValidationError):
        EngineConfig(lanes=0)
    with pytest.raises(ValidationError):
        EngineConfig(queue_depth=0)
    with pytest.raises(UsageError):
        run_dataflow(None, np.empty((0, 24)), EngineConfig.sequential())


def test_engines_reject_other_models_and_raw_features(split, synth_dataset, trained_heads, train_cfg):
    train, holdout = split
    tree = train_model(ModelKind.DT, train, Target.ATTACK, train_cfg)
    with pytest.raises(UsageError):
        run_engine(tree, holdout)
    with pytest.raises(DataError):
        run_engine(trained_heads[Target.ATTACK], synth_dataset.subset(np.arange(10)))
    with pytest.raises(DataError):
        run_engine(trained_heads[Target.ATTACK], holdout.features[:, :5], _dataflow(2))


def test_workload_tiles_cyclically(split):
    _, holdout = split
    tiled = workload_of(holdout, holdout.rows * 2 + 3)
    assert tiled.rows == holdout.rows * 2 + 3
    assert np.array_equal(tiled.features[holdout.rows:2 * holdout.rows], holdout.features)
    assert tiled.is_normalized
    with pytest.raises(EmptyDatasetError):
        workload_of(holdout.subset(np.arange(0)), 10)


def test_bench_enforces_minimums(trained_heads, split, workload):
    _, holdout = split
    model = trained_heads[Target.ATTACK]
    with pytest.raises(UsageError):
        bench(EngineConfig.sequential(), model, workload.subset(np.arange(999)))
    with pytest.raises(UsageError):
        bench(EngineConfig.sequential(), model, workload, repetitions=2)
    with pytest.raises(EmptyDatasetError):
        bench(EngineConfig.sequential(), model, holdout.subset(np.arange(0)))


def test_bench_reports_derived_metrics(trained_heads, workload):
    small = workload.subset(np.arange(1000))
    result = bench(_dataflow(4), trained_heads[Target.ATTACK], small, power_watts=4.39, lut_count=47514)
    assert result.packets_total == 1000
    assert len(result.repetition_seconds) == 3
    assert result.throughput_pps == pytest.approx(1000 / result.wall_seconds)
    assert result.efficiency_pps_per_watt == pytest.approx(result.throughput_pps / 4.39)
    assert result.density_pps_per_lut == pytest.approx(result.throughput_pps / 47514)
    assert result.model_name == "MLP-attack"


@pytest.mark.slow
def test_smaller_head_is_not_slower(trained_heads, workload):
    for cfg in (EngineConfig.sequential(), _dataflow(4)):
        # interleaved rounds so drift in machine load hits both heads alike
        attack, subcategory = [], []
        for _ in range(5):
            attack.append(bench(cfg, trained_heads[Target.ATTACK], workload).throughput_pps)
            subcategory.append(bench(cfg, trained_heads[Target.SUBCATEGORY], workload).throughput_pps)
        assert statistics.median(attack) >= statistics.median(subcategory)


@pytest.mark.slow
def test_more_lanes_raise_throughput(trained_heads, split):
    _, holdout = split
    large = workload_of(holdout, 100_000)
    model = trained_heads[Target.ATTACK]
    one = bench(_dataflow(1), model, large)
    four = bench(_dataflow(4), model, large)
    assert four.throughput_pps > one.throughput_pps


@pytest.mark.parametrize("lanes, queue_depth", _sampled_grid())
def test_sampled_lane_and_queue_grid_completes(trained_heads, workload, reference, lanes, queue_depth):
    result = _run_with_timeout(trained_heads[Target.SUBCATEGORY], workload, _dataflow(lanes, queue_depth=queue_depth))
    assert result.scores.tobytes() == reference.scores.tobytes()


@pytest.mark.slow
def test_full_lane_and_queue_grid_completes(trained_heads, workload):
    model = trained_heads[Target.ATTACK]
    expected = run_sequential(model, workload).scores.tobytes()
    for lanes in range(1, MAX_LANES + 1):
        for queue_depth in range(1, MAX_QUEUE_DEPTH + 1):
            result = _run_with_timeout(model, workload, _dataflow(lanes, queue_depth=queue_depth))
            assert result.scores.tobytes() == expected, (lanes, queue_depth)


@pytest.mark.slow
def test_doubling_the_workload_keeps_throughput_steady(trained_heads, split):
    _, holdout = split
    model = trained_heads[Target.ATTACK]
    base = workload_of(holdout, 20_000)
    doubled = workload_of(holdout, 40_000)
    for cfg in (EngineConfig.sequential(), _dataflow(4)):
        small = bench(cfg, model, base, repetitions=5).throughput_pps
        large = bench(cfg, model, doubled, repetitions=5).throughput_pps
        assert abs(large - small) / small < 0.2
