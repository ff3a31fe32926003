from enum import IntEnum

import numpy as np

from edgeids.app.core.errors import ArityError, ModelInvariantError


class ModelKind(IntEnum):
    """Classifier families; the values are the kind tags of the model file format."""
    MLP = 1
    NB = 2
    DT = 3
    RF = 4
    SVM = 5

    @property
    def label(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown model kind '{text}' (expected one of {', '.join(k.name.lower() for k in cls)})")


def require_finite(name: str, *arrays: np.ndarray) -> None:
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise ModelInvariantError(f"{name} holds non-finite parameters")


def check_arity(features: np.ndarray, expected: int) -> np.ndarray:
    """Return `features` as a float32 matrix, raising ArityError on a width mismatch."""
    matrix = np.asarray(features, dtype=np.float32)
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    if matrix.ndim != 2 or matrix.shape[1] != expected:
        raise ArityError(f"Expected {expected} features per row, got shape {np.shape(features)}")
    return matrix
