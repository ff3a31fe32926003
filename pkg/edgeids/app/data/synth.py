"""
Synthetic flow datasets standing in for BOT-IoT in tests and demos.

Every subcategory owns a block of three features. In the default layout a
class shifts its own block by `separation` standard deviations. With
`interaction=True` every block carries random signs and a class is recognised
only by sign concordance inside its block, so per-feature marginals are the
same for all classes (a dataset Gaussian naive Bayes cannot separate).
"""
import logging
from typing import List

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from edgeids.app.data.dataset import Dataset, labels_from_subcategories
from edgeids.app.data.labels import SUBCATEGORY_NAMES
from edgeids.app.data.schema import FEATURE_COUNT

logger = logging.getLogger("edgeids")

NUM_SUBCATEGORIES = len(SUBCATEGORY_NAMES)
BLOCK_WIDTH = 3

# Imbalanced mix shaped like the dataset's subcategory distribution:
# DoS and service scans dominate, theft and benign traffic are rare.
IMBALANCED_CLASS_WEIGHTS: List[float] = [0.05, 0.40, 0.08, 0.25, 0.12, 0.06, 0.04]
UNIFORM_CLASS_WEIGHTS: List[float] = [1.0 / NUM_SUBCATEGORIES] * NUM_SUBCATEGORIES


class SynthSpec(BaseModel):
    rows: int = Field(ge=NUM_SUBCATEGORIES)
    class_weights: List[float] = Field(default_factory=lambda: list(UNIFORM_CLASS_WEIGHTS))
    separation: float = Field(default=4.0, ge=0.0)
    seed: int = 0
    interaction: bool = False

    @field_validator("class_weights")
    @classmethod
    def _check_weights(cls, weights: List[float]) -> List[float]:
        if len(weights) != NUM_SUBCATEGORIES:
            raise ValueError(f"class_weights needs {NUM_SUBCATEGORIES} entries, got {len(weights)}")
        if any(w < 0 for w in weights):
            raise ValueError("class_weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError(f"class_weights must sum to 1, got {sum(weights)!r}")
        return weights

    @model_validator(mode="after")
    def _check_seed(self) -> "SynthSpec":
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return self


def synthesize(spec: SynthSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    weights = np.asarray(spec.class_weights, dtype=np.float64)
    subcategories = rng.choice(NUM_SUBCATEGORIES, size=spec.rows, p=weights / weights.sum())

    signal = np.zeros((spec.rows, FEATURE_COUNT), dtype=np.float64)
    if spec.interaction:
        signs = rng.choice(np.array([-1.0, 1.0]), size=(spec.rows, NUM_SUBCATEGORIES, BLOCK_WIDTH))
        own = np.arange(NUM_SUBCATEGORIES)[None, :] == subcategories[:, None]
        # concordant first pair inside the row's own block, discordant elsewhere
        signs[:, :, 1] = np.where(own, signs[:, :, 0], -signs[:, :, 0])
        signal[:, :NUM_SUBCATEGORIES * BLOCK_WIDTH] = spec.separation * signs.reshape(spec.rows, -1)
    else:
        for class_id in range(NUM_SUBCATEGORIES):
            block = slice(class_id * BLOCK_WIDTH, (class_id + 1) * BLOCK_WIDTH)
            signal[subcategories == class_id, block] = spec.separation

    noise = rng.standard_normal((spec.rows, FEATURE_COUNT))

    # flow-like magnitudes (byte counts, rates) so normalization has work to do
    scale = 10.0 ** rng.uniform(0.0, 3.0, size=FEATURE_COUNT)
    offset = rng.uniform(0.0, 50.0, size=FEATURE_COUNT) * scale
    features = ((signal + noise) * scale + offset).astype(np.float32)

    logger.info(
        f"Synthesized {spec.rows} rows (separation={spec.separation}, "
        f"interaction={spec.interaction}, seed={spec.seed})"
    )
    return Dataset(
        features=features,
        labels=labels_from_subcategories(subcategories),
        provenance="synthetic",
    )
