"""
Staged dataflow engine.

A feeder cuts the input into chunks of `reuse_factor x lanes` rows. Each layer
is a stage of `lanes` worker threads; stages are joined by bounded queues, so a
slow stage applies backpressure upstream. The output stage applies softmax and
a collector puts chunks back in input order.
"""
import logging
import queue
import threading
from typing import Callable, Dict, List, Optional, Union

import numpy as np

from edgeids.app.core.errors import UsageError
from edgeids.app.data.dataset import Dataset
from edgeids.app.engines.config import EngineConfig, EngineKind, Predictions, engine_inputs
from edgeids.app.engines.sequential import run_sequential
from edgeids.app.models.kernels import dense, relu, softmax
from edgeids.app.models.mlp import MlpModel

logger = logging.getLogger("edgeids")

# end-of-stream marker passed down every queue
_DONE = None


def _layer_stages(model: MlpModel) -> List[Callable[[np.ndarray], np.ndarray]]:
    stages = []
    last = len(model.weights) - 1
    for index, (w, b) in enumerate(zip(model.weights, model.biases)):
        if index < last:
            stages.append(lambda x, w=w, b=b: relu(dense(x, w, b)))
        else:
            stages.append(lambda x, w=w, b=b: softmax(dense(x, w, b)))
    return stages


class _Stage:
    """`lanes` workers reading one queue and writing the next."""

    def __init__(self, name: str, fn: Callable[[np.ndarray], np.ndarray], lanes: int,
                 inbox: queue.Queue, outbox: queue.Queue, downstream_lanes: int,
                 errors: List[BaseException]):
        self.name = name
        self.fn = fn
        self.inbox = inbox
        self.outbox = outbox
        self.downstream_lanes = downstream_lanes
        self.errors = errors
        self._alive = lanes
        self._lock = threading.Lock()
        self.threads = [
            threading.Thread(target=self._work, name=f"{name}-{lane}", daemon=True)
            for lane in range(lanes)
        ]

    def start(self) -> None:
        for thread in self.threads:
            thread.start()

    def join(self) -> None:
        for thread in self.threads:
            thread.join()

    def _work(self) -> None:
        while True:
            item = self.inbox.get()
            if item is _DONE:
                break
            if self.errors:
                continue  # drain after a failure
            index, rows = item
            try:
                self.outbox.put((index, self.fn(rows)))
            except BaseException as exc:  # surfaced by run_dataflow
                self.errors.append(exc)
        with self._lock:
            self._alive -= 1
            last_out = self._alive == 0
        if last_out:
            for _ in range(self.downstream_lanes):
                self.outbox.put(_DONE)


def run_dataflow(model: MlpModel, stream: Union[Dataset, np.ndarray], cfg: EngineConfig) -> Predictions:
    if cfg.kind is not EngineKind.DATAFLOW:
        raise UsageError(f"run_dataflow needs a dataflow engine config, got {cfg.kind.value}")
    if cfg.lanes < 1:
        raise UsageError("Dataflow engine needs at least one lane")
    inputs = engine_inputs(model, stream)
    rows = inputs.shape[0]
    if rows == 0:
        empty = np.empty((0, model.num_classes), dtype=np.float32)
        return Predictions(class_ids=np.empty(0, dtype=np.int64), scores=empty)

    step = cfg.chunk_rows
    starts = list(range(0, rows, step))
    errors: List[BaseException] = []

    fns = _layer_stages(model)
    logger.debug(f"Dataflow run: {rows} rows in {len(starts)} chunks, {len(fns)} stages x {cfg.lanes} lanes")
    queues = [queue.Queue(maxsize=cfg.queue_depth) for _ in range(len(fns) + 1)]
    stages = []
    for index, fn in enumerate(fns):
        is_last = index == len(fns) - 1
        stages.append(_Stage(
            name=f"stage{index + 1}",
            fn=fn,
            lanes=cfg.lanes,
            inbox=queues[index],
            outbox=queues[index + 1],
            downstream_lanes=1 if is_last else cfg.lanes,
            errors=errors,
        ))

    def feed() -> None:
        for index, start in enumerate(starts):
            queues[0].put((index, inputs[start:start + step]))
        for _ in range(cfg.lanes):
            queues[0].put(_DONE)

    feeder = threading.Thread(target=feed, name="feeder", daemon=True)
    for stage in stages:
        stage.start()
    feeder.start()

    results: Dict[int, np.ndarray] = {}
    while True:
        item = queues[-1].get()
        if item is _DONE:
            break
        index, scores = item
        results[index] = scores

    feeder.join()
    for stage in stages:
        stage.join()
    if errors:
        raise errors[0]

    scores = np.concatenate([results[i] for i in range(len(starts))], axis=0)
    return Predictions(class_ids=np.argmax(scores, axis=1), scores=scores)


def run_engine(model: MlpModel, batch: Union[Dataset, np.ndarray], cfg: Optional[EngineConfig] = None) -> Predictions:
    """Dispatch on `cfg.kind`; the default is the sequential engine."""
    cfg = cfg or EngineConfig.sequential()
    if cfg.kind is EngineKind.SEQUENTIAL:
        return run_sequential(model, batch)
    return run_dataflow(model, batch, cfg)
