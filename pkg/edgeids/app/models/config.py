from enum import Enum
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from edgeids.app.data.labels import Target


class ClassWeighting(str, Enum):
    NONE = "none"
    INVERSE_FREQUENCY = "inverse-frequency"
    # inverse-frequency for the category/subcategory heads, none for attack
    AUTO = "auto"

    def resolve(self, target: Target) -> "ClassWeighting":
        if self is not ClassWeighting.AUTO:
            return self
        if target is Target.ATTACK:
            return ClassWeighting.NONE
        return ClassWeighting.INVERSE_FREQUENCY


MaxFeatures = Union[int, Literal["all", "sqrt"]]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MlpTrainConfig(_Section):
    epochs: int = Field(default=20, gt=0)
    batch_size: int = Field(default=256, gt=0)
    learning_rate: float = Field(default=1e-3, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    class_weighting: ClassWeighting = ClassWeighting.AUTO


class NaiveBayesTrainConfig(_Section):
    var_floor: float = Field(default=1e-9, gt=0)


class TreeTrainConfig(_Section):
    max_depth: int = Field(default=16, gt=0)
    min_samples_split: int = Field(default=2, ge=2)
    max_features: MaxFeatures = "all"
    bootstrap: bool = False


class ForestTrainConfig(_Section):
    n_trees: int = Field(default=10, gt=0)
    max_depth: int = Field(default=16, gt=0)
    min_samples_split: int = Field(default=2, ge=2)
    max_features: MaxFeatures = "sqrt"
    bootstrap: bool = True
    n_jobs: int = Field(default=1, gt=0)

    def tree_config(self) -> TreeTrainConfig:
        return TreeTrainConfig(
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            max_features=self.max_features,
            bootstrap=self.bootstrap,
        )


class SvmTrainConfig(_Section):
    epochs: int = Field(default=20, gt=0)
    batch_size: int = Field(default=256, gt=0)
    learning_rate: float = Field(default=0.01, gt=0)
    alpha: float = Field(default=1e-4, ge=0)


class TrainConfig(_Section):
    """Hyperparameters for every classifier family; a fixed seed makes training bit-reproducible."""
    seed: int = Field(default=0, ge=0)
    mlp: MlpTrainConfig = MlpTrainConfig()
    nb: NaiveBayesTrainConfig = NaiveBayesTrainConfig()
    tree: TreeTrainConfig = TreeTrainConfig()
    forest: ForestTrainConfig = ForestTrainConfig()
    svm: SvmTrainConfig = SvmTrainConfig()
