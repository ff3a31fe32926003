"""Single-lane engine: one row at a time, strictly in input order."""
from typing import Union

import numpy as np

from edgeids.app.data.dataset import Dataset
from edgeids.app.engines.config import Predictions, engine_inputs
from edgeids.app.models.kernels import mlp_forward
from edgeids.app.models.mlp import MlpModel


def run_sequential(model: MlpModel, batch: Union[Dataset, np.ndarray]) -> Predictions:
    inputs = engine_inputs(model, batch)
    rows = inputs.shape[0]
    scores = np.empty((rows, model.num_classes), dtype=np.float32)
    for row in range(rows):
        scores[row] = mlp_forward(inputs[row:row + 1], model.weights, model.biases)[0]
    return Predictions(class_ids=np.argmax(scores, axis=1), scores=scores)
