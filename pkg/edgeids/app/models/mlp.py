import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from edgeids.app.core.errors import DataError, ModelInvariantError, TrainingError
from edgeids.app.data.dataset import Dataset
from edgeids.app.data.labels import Target
from edgeids.app.data.schema import FEATURE_COUNT
from edgeids.app.models.base import ModelKind, require_finite
from edgeids.app.models.config import ClassWeighting, TrainConfig

logger = logging.getLogger("edgeids")

HIDDEN_SIZES = (32, 64)


@dataclass(frozen=True)
class MlpTopology:
    """Layer widths from input to output. Hidden layers use ReLU, the output layer softmax."""
    layer_sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ModelInvariantError(f"Invalid layer sizes {sizes}")
        if sizes[0] != FEATURE_COUNT:
            raise ModelInvariantError(f"First layer must have {FEATURE_COUNT} inputs, got {sizes[0]}")

    @classmethod
    def for_target(cls, target: Target) -> "MlpTopology":
        return cls((FEATURE_COUNT, *HIDDEN_SIZES, target.num_classes))

    @property
    def layer_shapes(self) -> List[Tuple[int, int]]:
        """(out, in) per layer."""
        return [(o, i) for i, o in zip(self.layer_sizes[:-1], self.layer_sizes[1:])]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    @property
    def parameter_count(self) -> int:
        return sum(o * i + o for o, i in self.layer_shapes)

    def check_target(self, target: Target) -> None:
        expected = MlpTopology.for_target(target)
        if self.layer_sizes != expected.layer_sizes:
            raise ModelInvariantError(
                f"Topology {list(self.layer_sizes)} does not match the {target.value} head "
                f"{list(expected.layer_sizes)}"
            )


@dataclass(frozen=True)
class MlpModel:
    topology: MlpTopology
    target: Target
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    kind = ModelKind.MLP

    def __post_init__(self):
        self.topology.check_target(self.target)
        weights = tuple(np.asarray(w, dtype=np.float32) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=np.float32) for b in self.biases)
        shapes = self.topology.layer_shapes
        if len(weights) != len(shapes) or len(biases) != len(shapes):
            raise ModelInvariantError("Layer count does not match topology")
        for (out, fan_in), w, b in zip(shapes, weights, biases):
            if w.shape != (out, fan_in) or b.shape != (out,):
                raise ModelInvariantError(
                    f"Layer shape {w.shape}/{b.shape} does not match ({out}, {fan_in})"
                )
        require_finite("MLP", *weights, *biases)
        for array in (*weights, *biases):
            array.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def num_classes(self) -> int:
        return self.topology.output_size

    @property
    def num_features(self) -> int:
        return self.topology.layer_sizes[0]

    @classmethod
    def zeros(cls, target: Target) -> "MlpModel":
        topology = MlpTopology.for_target(target)
        return cls(
            topology=topology,
            target=target,
            weights=tuple(np.zeros(shape, dtype=np.float32) for shape in topology.layer_shapes),
            biases=tuple(np.zeros(shape[0], dtype=np.float32) for shape in topology.layer_shapes),
        )


@dataclass
class TrainingHistory:
    initial_loss: float
    epoch_losses: List[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else self.initial_loss


def class_weights_for(labels: np.ndarray, num_classes: int, scheme: ClassWeighting) -> np.ndarray:
    """Per-class loss weights; inverse-frequency weights average to 1 over the samples."""
    if scheme is ClassWeighting.NONE:
        return np.ones(num_classes, dtype=np.float64)
    counts = np.bincount(labels, minlength=num_classes).astype(np.float64)
    present = counts > 0
    weights = np.zeros(num_classes, dtype=np.float64)
    weights[present] = labels.size / (present.sum() * counts[present])
    return weights


def loss_and_gradients(
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    inputs: np.ndarray,
    labels: np.ndarray,
    class_weights: Optional[np.ndarray] = None,
) -> Tuple[float, List[np.ndarray], List[np.ndarray]]:
    """
    Weighted mean cross-entropy of the softmax output and its gradients.
    Arithmetic runs in the dtype of `weights` (float32 for training, float64 for checks).
    """
    dtype = weights[0].dtype
    sample_w = np.ones(labels.size, dtype=dtype) if class_weights is None \
        else np.asarray(class_weights, dtype=dtype)[labels]
    total_w = sample_w.sum()
    if total_w <= 0:
        raise DataError("Batch carries zero total class weight")

    # forward, keeping pre-activations for the ReLU masks
    activations = [inputs.astype(dtype, copy=False)]
    pre = []
    last = len(weights) - 1
    for index, (w, b) in enumerate(zip(weights, biases)):
        z = activations[-1] @ w.T + b
        pre.append(z)
        activations.append(np.maximum(z, 0) if index < last else z)

    logits = activations[-1]
    log_probs = log_softmax(logits, axis=1)
    rows = np.arange(labels.size)
    loss = float(-(sample_w * log_probs[rows, labels]).sum() / total_w)

    delta = softmax(logits, axis=1).astype(dtype, copy=False)
    delta[rows, labels] -= 1
    delta *= (sample_w / total_w)[:, None]

    grad_w: List[np.ndarray] = [None] * len(weights)
    grad_b: List[np.ndarray] = [None] * len(weights)
    for index in range(last, -1, -1):
        grad_w[index] = delta.T @ activations[index]
        grad_b[index] = delta.sum(axis=0)
        if index > 0:
            delta = (delta @ weights[index]) * (pre[index - 1] > 0)
    return loss, grad_w, grad_b


def init_parameters(topology: MlpTopology, rng: np.random.Generator):
    """He-style initialization: N(0, 2 / fan_in) weights, zero biases."""
    weights, biases = [], []
    for out, fan_in in topology.layer_shapes:
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(out, fan_in)).astype(np.float32))
        biases.append(np.zeros(out, dtype=np.float32))
    return weights, biases


def train_mlp_with_history(train: Dataset, target: Target, cfg: TrainConfig) -> Tuple[MlpModel, TrainingHistory]:
    if train.rows == 0:
        raise DataError("Cannot train on an empty dataset")
    if not train.is_normalized:
        raise DataError("MLP training expects a normalized dataset")

    settings = cfg.mlp
    topology = MlpTopology.for_target(target)
    rng = np.random.default_rng(cfg.seed)
    weights, biases = init_parameters(topology, rng)

    inputs = train.features.astype(np.float32)
    labels = train.targets(target).astype(np.int64)
    class_w = class_weights_for(labels, topology.output_size, settings.class_weighting.resolve(target))

    initial_loss, _, _ = loss_and_gradients(weights, biases, inputs, labels, class_w)
    history = TrainingHistory(initial_loss=initial_loss)
    logger.info(f"Training {target.value} MLP {list(topology.layer_sizes)} on {train.rows} rows "
                f"(initial loss {initial_loss:.4f})")

    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    lr = np.float32(settings.learning_rate)
    momentum = np.float32(settings.momentum)

    for epoch in range(settings.epochs):
        order = rng.permutation(train.rows)
        running, seen = 0.0, 0
        for batch, start in enumerate(range(0, train.rows, settings.batch_size)):
            idx = order[start:start + settings.batch_size]
            loss, grad_w, grad_b = loss_and_gradients(weights, biases, inputs[idx], labels[idx], class_w)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"Non-finite loss at epoch {epoch}, batch {batch}", epoch=epoch, batch=batch
                )
            for i in range(len(weights)):
                vel_w[i] = momentum * vel_w[i] - lr * grad_w[i].astype(np.float32)
                vel_b[i] = momentum * vel_b[i] - lr * grad_b[i].astype(np.float32)
                weights[i] = weights[i] + vel_w[i]
                biases[i] = biases[i] + vel_b[i]
            running += loss * idx.size
            seen += idx.size
        history.epoch_losses.append(running / seen)
        logger.debug(f"epoch {epoch + 1}/{settings.epochs} loss {history.epoch_losses[-1]:.5f}")

    for w, b in zip(weights, biases):
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise TrainingError("Training produced non-finite parameters", epoch=settings.epochs - 1)

    logger.info(f"Finished {target.value} MLP: loss {initial_loss:.4f} -> {history.final_loss:.4f}")
    model = MlpModel(topology=topology, target=target, weights=tuple(weights), biases=tuple(biases))
    return model, history


def train_mlp(train: Dataset, target: Target, cfg: TrainConfig) -> MlpModel:
    model, _ = train_mlp_with_history(train, target, cfg)
    return model
