from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from edgeids.app.core.errors import DataError

CATEGORY_NAMES: Tuple[str, ...] = ("Normal", "DoS", "Reconnaissance", "Theft")

SUBCATEGORY_NAMES: Tuple[str, ...] = (
    "Normal",
    "DoS_TCP",
    "DoS_HTTP",
    "Recon_ServiceScan",
    "Recon_OSFingerprint",
    "Theft_Keylogging",
    "Theft_DataExfiltration",
)

# parent category of every subcategory, by index
SUBCATEGORY_PARENT: Tuple[int, ...] = (0, 1, 1, 2, 2, 3, 3)


class Target(str, Enum):
    """The three classification heads: binary attack, 4-way category, 7-way subcategory."""
    ATTACK = "attack"
    CATEGORY = "category"
    SUBCATEGORY = "subcategory"

    @property
    def num_classes(self) -> int:
        return {Target.ATTACK: 2, Target.CATEGORY: 4, Target.SUBCATEGORY: 7}[self]

    @property
    def column(self) -> int:
        """Column of the target inside a Dataset label matrix."""
        return {Target.ATTACK: 0, Target.CATEGORY: 1, Target.SUBCATEGORY: 2}[self]

    @property
    def wire_code(self) -> int:
        return {Target.ATTACK: 1, Target.CATEGORY: 2, Target.SUBCATEGORY: 3}[self]

    @property
    def class_names(self) -> Tuple[str, ...]:
        if self is Target.ATTACK:
            return ("normal", "attack")
        if self is Target.CATEGORY:
            return CATEGORY_NAMES
        return SUBCATEGORY_NAMES

    @classmethod
    def from_wire(cls, code: int) -> "Target":
        for target in cls:
            if target.wire_code == code:
                return target
        raise DataError(f"Unknown target code {code}")


@dataclass(frozen=True)
class LabelTriple:
    attack: int
    category: int
    subcategory: int

    def __post_init__(self):
        if not 0 <= self.subcategory < len(SUBCATEGORY_NAMES):
            raise DataError(f"Subcategory id {self.subcategory} out of range")
        if self.category != SUBCATEGORY_PARENT[self.subcategory]:
            raise DataError(
                f"Category {self.category} inconsistent with subcategory "
                f"{SUBCATEGORY_NAMES[self.subcategory]}"
            )
        if self.attack != int(self.subcategory != 0):
            raise DataError(f"Attack flag {self.attack} inconsistent with subcategory "
                            f"{SUBCATEGORY_NAMES[self.subcategory]}")

    @classmethod
    def from_subcategory(cls, subcategory: int) -> "LabelTriple":
        return cls(
            attack=int(subcategory != 0),
            category=SUBCATEGORY_PARENT[subcategory],
            subcategory=subcategory,
        )

    def of(self, target: Target) -> int:
        return (self.attack, self.category, self.subcategory)[target.column]

    @property
    def category_name(self) -> str:
        return CATEGORY_NAMES[self.category]

    @property
    def subcategory_name(self) -> str:
        return SUBCATEGORY_NAMES[self.subcategory]
