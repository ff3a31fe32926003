"""
CART decision trees (Gini impurity) and random forests built from them.

A tree is stored as flat node arrays in pre-order: internal nodes hold a split
feature and threshold (`x[feature] <= threshold` goes left), leaves hold the
class distribution of their training samples.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from edgeids.app.core.errors import DataError, ModelInvariantError
from edgeids.app.data.dataset import Dataset
from edgeids.app.data.labels import Target
from edgeids.app.models.base import ModelKind, require_finite
from edgeids.app.models.config import MaxFeatures, TrainConfig, TreeTrainConfig

logger = logging.getLogger("edgeids")

LEAF = -1
MIN_GAIN = 1e-12


@dataclass(frozen=True)
class TreeModel:
    target: Target
    num_features: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    kind = ModelKind.DT

    def __post_init__(self):
        arrays = {
            "feature": np.asarray(self.feature, dtype=np.int32),
            "threshold": np.asarray(self.threshold, dtype=np.float32),
            "left": np.asarray(self.left, dtype=np.int32),
            "right": np.asarray(self.right, dtype=np.int32),
            "value": np.asarray(self.value, dtype=np.float32),
        }
        n = arrays["feature"].shape[0]
        if n == 0:
            raise ModelInvariantError("Decision tree has no nodes")
        for name in ("threshold", "left", "right"):
            if arrays[name].shape != (n,):
                raise ModelInvariantError(f"Decision tree array '{name}' has the wrong length")
        if arrays["value"].shape != (n, self.target.num_classes):
            raise ModelInvariantError("Decision tree leaf distributions have the wrong shape")
        require_finite("Decision tree", arrays["threshold"], arrays["value"])

        internal = arrays["feature"] != LEAF
        nodes = np.arange(n)
        for name in ("left", "right"):
            children = arrays[name][internal]
            # pre-order layout: children come after their parent, which rules out cycles
            if np.any(children <= nodes[internal]) or np.any(children >= n):
                raise ModelInvariantError("Decision tree child indices out of bounds or cyclic")
            if np.any(arrays[name][~internal] != LEAF):
                raise ModelInvariantError("Decision tree leaf with children")
        if np.any(arrays["feature"][internal] >= self.num_features) or np.any(arrays["feature"] < LEAF):
            raise ModelInvariantError("Decision tree split feature out of range")

        for name, array in arrays.items():
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def num_classes(self) -> int:
        return self.target.num_classes

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    def leaf_index(self, inputs: np.ndarray) -> np.ndarray:
        node = np.zeros(inputs.shape[0], dtype=np.int64)
        rows = np.arange(inputs.shape[0])
        while True:
            split = self.feature[node]
            active = split != LEAF
            if not np.any(active):
                return node
            go_left = inputs[rows[active], split[active]] <= self.threshold[node[active]]
            node[active] = np.where(go_left, self.left[node[active]], self.right[node[active]])

    def scores(self, inputs: np.ndarray) -> np.ndarray:
        """Leaf class distributions."""
        return self.value[self.leaf_index(inputs)]


@dataclass(frozen=True)
class ForestModel:
    target: Target
    trees: Tuple[TreeModel, ...]

    kind = ModelKind.RF

    def __post_init__(self):
        trees = tuple(self.trees)
        if not trees:
            raise ModelInvariantError("Random forest must contain at least one tree")
        if any(t.target is not self.target for t in trees):
            raise ModelInvariantError("Random forest trees disagree on the target")
        if len({t.num_features for t in trees}) != 1:
            raise ModelInvariantError("Random forest trees disagree on the feature count")
        object.__setattr__(self, "trees", trees)

    @property
    def num_classes(self) -> int:
        return self.target.num_classes

    @property
    def num_features(self) -> int:
        return self.trees[0].num_features

    def scores(self, inputs: np.ndarray) -> np.ndarray:
        """Vote shares: each tree votes for the argmax of its leaf distribution."""
        votes = np.zeros((inputs.shape[0], self.num_classes), dtype=np.float32)
        rows = np.arange(inputs.shape[0])
        for tree in self.trees:
            votes[rows, np.argmax(tree.scores(inputs), axis=1)] += np.float32(1.0)
        return votes / np.float32(len(self.trees))


def resolve_max_features(setting: MaxFeatures, num_features: int) -> int:
    if setting == "all":
        return num_features
    if setting == "sqrt":
        return max(1, int(np.floor(np.sqrt(num_features))))
    return max(1, min(int(setting), num_features))


def _gini(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        share = counts / totals[:, None]
    return 1.0 - np.nansum(share * share, axis=1)


def _best_split(x: np.ndarray, y: np.ndarray, k: int, features: np.ndarray) -> Tuple[Optional[int], float, float]:
    """Return (feature, threshold, gain) of the best Gini split, or (None, 0, 0)."""
    n = y.size
    parent_counts = np.bincount(y, minlength=k).astype(np.float64)
    parent = 1.0 - np.sum((parent_counts / n) ** 2)
    best: Tuple[Optional[int], float, float] = (None, 0.0, 0.0)
    onehot = np.eye(k)

    for f in features:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        distinct = xs[:-1] < xs[1:]
        if not np.any(distinct):
            continue
        left_counts = np.cumsum(onehot[y[order]], axis=0)[:-1]
        n_left = np.arange(1, n, dtype=np.float64)
        right_counts = parent_counts[None, :] - left_counts
        n_right = n - n_left
        impurity = (n_left * _gini(left_counts, n_left) + n_right * _gini(right_counts, n_right)) / n
        impurity = np.where(distinct, impurity, np.inf)
        pos = int(np.argmin(impurity))
        gain = parent - impurity[pos]
        if gain > best[2] + MIN_GAIN:
            lo, hi = xs[pos], xs[pos + 1]
            threshold = np.float32((float(lo) + float(hi)) / 2.0)
            if not lo <= threshold < hi:
                threshold = np.float32(lo)
            best = (int(f), float(threshold), float(gain))
    return best


def build_tree(
    inputs: np.ndarray,
    labels: np.ndarray,
    target: Target,
    settings: TreeTrainConfig,
    rng: np.random.Generator,
) -> TreeModel:
    """Grow one CART tree. `rng` drives bootstrapping and per-node feature sampling."""
    n, d = inputs.shape
    k = target.num_classes
    if settings.bootstrap:
        sample = rng.integers(0, n, size=n)
        inputs, labels = inputs[sample], labels[sample]
    m = resolve_max_features(settings.max_features, d)

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[np.ndarray] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        node = len(feature)
        y = labels[idx]
        counts = np.bincount(y, minlength=k).astype(np.float64)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append((counts / counts.sum()).astype(np.float32))

        if depth >= settings.max_depth or idx.size < settings.min_samples_split or np.count_nonzero(counts) <= 1:
            return node
        candidates = np.arange(d) if m == d else np.sort(rng.choice(d, size=m, replace=False))
        split, thr, gain = _best_split(inputs[idx], y, k, candidates)
        if split is None:
            return node

        goes_left = inputs[idx, split] <= np.float32(thr)
        feature[node] = split
        threshold[node] = thr
        left[node] = grow(idx[goes_left], depth + 1)
        right[node] = grow(idx[~goes_left], depth + 1)
        return node

    grow(np.arange(inputs.shape[0]), 0)
    return TreeModel(
        target=target,
        num_features=d,
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float32),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.stack(value),
    )


def tree_rng(seed: int, index: int) -> np.random.Generator:
    """Per-tree generator derived from (master seed, tree index)."""
    return np.random.default_rng([seed, index])


def _training_arrays(train: Dataset, target: Target):
    if train.rows == 0:
        raise DataError("Cannot train on an empty dataset")
    return train.features.astype(np.float32), train.targets(target).astype(np.int64)


def train_decision_tree(train: Dataset, target: Target, cfg: TrainConfig) -> TreeModel:
    inputs, labels = _training_arrays(train, target)
    tree = build_tree(inputs, labels, target, cfg.tree, tree_rng(cfg.seed, 0))
    logger.info(f"Trained {target.value} decision tree with {tree.node_count} nodes")
    return tree


def train_random_forest(train: Dataset, target: Target, cfg: TrainConfig) -> ForestModel:
    inputs, labels = _training_arrays(train, target)
    settings = cfg.forest
    tree_settings = settings.tree_config()

    def fit(index: int) -> TreeModel:
        return build_tree(inputs, labels, target, tree_settings, tree_rng(cfg.seed, index))

    if settings.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=settings.n_jobs) as pool:
            trees = list(pool.map(fit, range(settings.n_trees)))
    else:
        trees = [fit(i) for i in range(settings.n_trees)]
    logger.info(f"Trained {target.value} random forest with {len(trees)} trees")
    return ForestModel(target=target, trees=tuple(trees))
