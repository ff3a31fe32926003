import numpy as np
import pytest

from edgeids.app.core.errors import ArityError, DataError, ModelInvariantError, UsageError
from edgeids.app.data.dataset import apply_normalize, fit_normalize, stratified_split
from edgeids.app.data.labels import Target
from edgeids.app.data.synth import UNIFORM_CLASS_WEIGHTS, SynthSpec, synthesize
from edgeids.app.evaluation.metrics import evaluate
from edgeids.app.models.base import ModelKind
from edgeids.app.models.config import ClassWeighting, MlpTrainConfig, TrainConfig
from edgeids.app.models.kernels import mlp_forward, softmax
from edgeids.app.models.mlp import (
    MlpModel,
    MlpTopology,
    class_weights_for,
    init_parameters,
    loss_and_gradients,
    train_mlp_with_history,
)
from edgeids.app.models.naive_bayes import NaiveBayesModel
from edgeids.app.models.tree import LEAF, ForestModel, TreeModel
from edgeids.app.models.zoo import model_name, predict, predict_batch, train_baseline, train_model


def _numeric_gradient(weights, biases, inputs, labels, params, eps=1e-6):
    grads = []
    for p in params:
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            plus, _, _ = loss_and_gradients(weights, biases, inputs, labels)
            flat[i] = saved - eps
            minus, _, _ = loss_and_gradients(weights, biases, inputs, labels)
            flat[i] = saved
            gflat[i] = (plus - minus) / (2 * eps)
        grads.append(g)
    return grads


@pytest.mark.parametrize("target", list(Target))
def test_backprop_matches_finite_differences(target, rng):
    topology = MlpTopology.for_target(target)
    weights, biases = init_parameters(topology, rng)
    weights = [w.astype(np.float64) for w in weights]
    biases = [rng.normal(0.0, 0.1, size=b.shape) for b in biases]
    inputs = rng.uniform(0.0, 1.0, size=(5, topology.layer_sizes[0]))
    labels = rng.integers(0, target.num_classes, size=5)

    _, grad_w, grad_b = loss_and_gradients(weights, biases, inputs, labels)
    num_w = _numeric_gradient(weights, biases, inputs, labels, weights)
    num_b = _numeric_gradient(weights, biases, inputs, labels, biases)

    for analytic, numeric in zip(grad_w + grad_b, num_w + num_b):
        scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
        assert np.linalg.norm(analytic - numeric) / scale < 1e-4


def test_class_weights_average_to_one():
    labels = np.array([0, 0, 0, 1, 2, 2])
    weights = class_weights_for(labels, 4, ClassWeighting.INVERSE_FREQUENCY)
    assert weights[3] == 0.0
    assert weights[labels].mean() == pytest.approx(1.0)
    assert np.all(class_weights_for(labels, 4, ClassWeighting.NONE) == 1.0)
    assert ClassWeighting.AUTO.resolve(Target.ATTACK) is ClassWeighting.NONE


def test_mlp_training_is_reproducible_and_reduces_loss(split):
    train, _ = split
    cfg = TrainConfig(seed=5, mlp=MlpTrainConfig(epochs=3, batch_size=128, learning_rate=0.01))
    first, history = train_mlp_with_history(train, Target.CATEGORY, cfg)
    second, _ = train_mlp_with_history(train, Target.CATEGORY, cfg)
    assert history.final_loss < history.initial_loss
    for a, b in zip(first.weights + first.biases, second.weights + second.biases):
        assert np.array_equal(a, b)


def test_mlp_training_requires_normalized_data(synth_dataset, train_cfg):
    with pytest.raises(DataError):
        train_model(ModelKind.MLP, synth_dataset, Target.ATTACK, train_cfg)


def test_mlp_attack_head_separates_synthetic_traffic(trained_heads, split):
    _, holdout = split
    report = evaluate(trained_heads[Target.ATTACK], holdout, Target.ATTACK)
    assert report.macro.f1 >= 0.99
    assert report.model_name == "MLP-attack"


@pytest.mark.parametrize("kind", [ModelKind.NB, ModelKind.DT, ModelKind.RF, ModelKind.SVM])
def test_baselines_learn_the_separable_set(kind, split):
    train, holdout = split
    cfg = TrainConfig(seed=7, svm={"epochs": 60, "batch_size": 64, "learning_rate": 0.05})
    model = train_baseline(kind, train, Target.CATEGORY, cfg)
    assert model.kind is kind
    assert model_name(model) == f"{kind.name}-category"
    assert evaluate(model, holdout, Target.CATEGORY).macro.f1 >= 0.9


def test_train_baseline_rejects_mlp(split, train_cfg):
    with pytest.raises(UsageError):
        train_baseline(ModelKind.MLP, split[0], Target.ATTACK, train_cfg)


def test_naive_bayes_falls_behind_mlp_on_feature_interactions():
    ds = synthesize(SynthSpec(rows=4000, class_weights=list(UNIFORM_CLASS_WEIGHTS), seed=21, interaction=True))
    train_raw, test_raw = stratified_split(ds, 0.8, seed=21)
    train = fit_normalize(train_raw)
    holdout = apply_normalize(test_raw, train.norm_stats)
    cfg = TrainConfig(
        seed=21,
        mlp=MlpTrainConfig(epochs=40, batch_size=32, learning_rate=0.01, class_weighting="inverse-frequency"),
    )
    mlp = evaluate(train_model(ModelKind.MLP, train, Target.ATTACK, cfg), holdout, Target.ATTACK)
    nb = evaluate(train_model(ModelKind.NB, train, Target.ATTACK, cfg), holdout, Target.ATTACK)
    assert nb.macro.f1 < mlp.macro.f1


def test_forest_is_reproducible_across_thread_counts(split):
    train, _ = split
    serial = TrainConfig(seed=3, forest={"n_trees": 4, "max_depth": 6, "n_jobs": 1})
    pooled = TrainConfig(seed=3, forest={"n_trees": 4, "max_depth": 6, "n_jobs": 4})
    a = train_model(ModelKind.RF, train, Target.SUBCATEGORY, serial)
    b = train_model(ModelKind.RF, train, Target.SUBCATEGORY, pooled)
    for ta, tb in zip(a.trees, b.trees):
        assert np.array_equal(ta.feature, tb.feature)
        assert np.array_equal(ta.threshold, tb.threshold)


def test_tree_respects_max_depth_and_pre_order_layout(split):
    train, _ = split
    cfg = TrainConfig(seed=0, tree={"max_depth": 3})
    tree = train_model(ModelKind.DT, train, Target.SUBCATEGORY, cfg)
    assert tree.node_count <= 2 ** 4 - 1
    internal = tree.feature != LEAF
    assert np.all(tree.left[internal] > np.flatnonzero(internal))
    assert np.allclose(tree.value.sum(axis=1), 1.0)


def test_tree_invariants_are_enforced():
    with pytest.raises(ModelInvariantError):
        TreeModel(
            target=Target.ATTACK,
            num_features=24,
            feature=np.array([0, LEAF, LEAF]),
            threshold=np.zeros(3),
            left=np.array([0, LEAF, LEAF]),
            right=np.array([2, LEAF, LEAF]),
            value=np.full((3, 2), 0.5),
        )


def test_predict_matches_predict_batch_row_by_row(trained_heads, split):
    _, holdout = split
    model = trained_heads[Target.SUBCATEGORY]
    ids, scores = predict_batch(model, holdout.features[:20])
    for row in range(20):
        class_id, row_scores = predict(model, holdout.features[row])
        assert class_id == ids[row]
        assert np.array_equal(row_scores, scores[row])
    assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-5)


def test_predict_rejects_wrong_arity(trained_heads):
    with pytest.raises(ArityError):
        predict(trained_heads[Target.ATTACK], np.zeros(23, dtype=np.float32))


def test_forward_kernel_is_batch_invariant(trained_heads, split):
    _, holdout = split
    model = trained_heads[Target.CATEGORY]
    batch = mlp_forward(holdout.features[:64], model.weights, model.biases)
    for row in (0, 17, 63):
        single = mlp_forward(holdout.features[row:row + 1], model.weights, model.biases)
        assert np.array_equal(single[0], batch[row])


def test_all_zero_mlp_splits_evenly_and_picks_class_zero():
    model = MlpModel.zeros(Target.ATTACK)
    class_id, scores = predict(model, np.full(24, 0.3, dtype=np.float32))
    assert class_id == 0
    assert scores.tolist() == [0.5, 0.5]


def test_softmax_argmax_ignores_a_constant_shift(rng):
    logits = rng.normal(0.0, 3.0, size=(200, 7))
    base = softmax(logits)
    for shift in (-50.0, 3.5, 1000.0):
        shifted = softmax(logits + shift)
        assert np.array_equal(np.argmax(shifted, axis=1), np.argmax(base, axis=1))
        assert np.allclose(shifted, base, atol=1e-12)


def test_one_split_tree_routes_by_threshold():
    tree = TreeModel(
        target=Target.ATTACK,
        num_features=24,
        feature=np.array([0, LEAF, LEAF]),
        threshold=np.array([0.5, 0.0, 0.0]),
        left=np.array([1, LEAF, LEAF]),
        right=np.array([2, LEAF, LEAF]),
        value=np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]]),
    )
    x = np.zeros(24, dtype=np.float32)
    x[0] = 0.7
    assert tree.leaf_index(x[None, :]).tolist() == [2]
    class_id, scores = predict(tree, x)
    assert class_id == 1
    assert scores.tolist() == [0.0, 1.0]
    x[0] = 0.3
    assert predict(tree, x)[0] == 0
    # the threshold itself goes left
    x[0] = 0.5
    assert tree.leaf_index(x[None, :]).tolist() == [1]


def test_single_tree_forest_predicts_like_its_tree(split):
    train, holdout = split
    cfg = TrainConfig(
        seed=4,
        tree={"max_depth": 6},
        forest={"n_trees": 1, "max_depth": 6, "max_features": "all", "bootstrap": False},
    )
    tree = train_model(ModelKind.DT, train, Target.SUBCATEGORY, cfg)
    forest = train_model(ModelKind.RF, train, Target.SUBCATEGORY, cfg)
    assert np.array_equal(forest.trees[0].feature, tree.feature)
    assert np.array_equal(forest.trees[0].threshold, tree.threshold)
    tree_ids, _ = predict_batch(tree, holdout.features)
    forest_ids, _ = predict_batch(forest, holdout.features)
    assert np.array_equal(forest_ids, tree_ids)

    wrapped = ForestModel(target=Target.SUBCATEGORY, trees=(tree,))
    assert np.array_equal(predict_batch(wrapped, holdout.features)[0], tree_ids)


def test_naive_bayes_scores_stay_finite_on_the_unit_cube(split, rng):
    train, _ = split
    trained = train_model(ModelKind.NB, train, Target.SUBCATEGORY, TrainConfig(seed=0))
    # every variance at the floor is the most extreme model the floor allows
    floored = NaiveBayesModel(
        target=Target.ATTACK,
        priors=np.array([0.5, 0.5]),
        means=np.stack([np.zeros(24), np.ones(24)]),
        variances=np.full((2, 24), 1e-9),
    )
    inputs = np.vstack([
        rng.uniform(0.0, 1.0, size=(2000, 24)),
        np.zeros((1, 24)),
        np.ones((1, 24)),
        np.tile([0.0, 1.0], 12)[None, :],
    ]).astype(np.float32)
    for model in (trained, floored):
        _, scores = predict_batch(model, inputs)
        assert np.all(np.isfinite(scores))
        assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-5)


def test_separation_zero_is_near_chance():
    ds = synthesize(SynthSpec(rows=2100, class_weights=list(UNIFORM_CLASS_WEIGHTS), separation=0.0, seed=13))
    train_raw, test_raw = stratified_split(ds, 0.8, seed=13)
    train = fit_normalize(train_raw)
    holdout = apply_normalize(test_raw, train.norm_stats)
    cfg = TrainConfig(seed=13, mlp=MlpTrainConfig(epochs=10, batch_size=64, learning_rate=0.01))
    report = evaluate(train_model(ModelKind.MLP, train, Target.SUBCATEGORY, cfg), holdout, Target.SUBCATEGORY)
    assert report.macro.f1 <= 0.6


def test_mlp_rejects_wrong_topology():
    model = MlpModel.zeros(Target.ATTACK)
    with pytest.raises(ModelInvariantError):
        MlpModel(topology=model.topology, target=Target.CATEGORY, weights=model.weights, biases=model.biases)
