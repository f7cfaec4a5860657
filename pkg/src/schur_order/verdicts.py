"""Class labels and check outcomes shared by the scalar and matrix testers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class SClass(str, enum.Enum):
    """Entrywise positivity classes of a fixed order."""

    POS = "S-pos"
    MONO = "S-mono"
    CONV = "S-conv"

    @property
    def first_coefficient(self) -> int:
        """Index from which Taylor coefficients must be nonnegative."""
        return {SClass.POS: 0, SClass.MONO: 1, SClass.CONV: 2}[self]

    @classmethod
    def parse(cls, text: "str | SClass") -> "SClass":
        if isinstance(text, SClass):
            return text
        key = text.lower().replace("-", "").replace("_", "")
        aliases = {
            "spos": cls.POS, "pos": cls.POS, "positive": cls.POS,
            "smono": cls.MONO, "mono": cls.MONO, "monotone": cls.MONO,
            "sconv": cls.CONV, "conv": cls.CONV, "convex": cls.CONV,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown class {text!r}; expected spos, smono or sconv") from None


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy containers and scalars into JSON-ready values."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


@dataclass(frozen=True)
class ClassVerdict:
    """Outcome of a class-membership check.

    ``margin`` is the most violated (smallest) normalized gap seen; it is
    negative exactly when a violation was found.  A passing verdict carries
    no witness.
    """

    holds: bool
    margin: float
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.holds and self.witness is not None:
            raise ValueError("a passing verdict cannot carry a witness")

    def to_dict(self) -> dict:
        return jsonable({
            "holds": self.holds,
            "margin": self.margin,
            "witness": self.witness,
            "details": self.details,
        })
