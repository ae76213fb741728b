"""Relaxation parameters of the GAP operator and their admissibility cases."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidParametersError

B1, B2, B3, INVALID = "B1", "B2", "B3", "Invalid"


def _case(alpha: float, alpha1: float, alpha2: float) -> str:
    in_open = lambda a: 0.0 < a < 2.0
    in_half = lambda a: 0.0 < a <= 2.0
    if 0.0 < alpha <= 1.0 and in_open(alpha1) and in_open(alpha2):
        return B1
    if 0.0 < alpha < 1.0 and in_half(alpha1) and in_half(alpha2):
        return B3 if alpha1 == 2.0 and alpha2 == 2.0 else B2
    return INVALID


@dataclass(frozen=True)
class GapParams:
    """Parameters ``(alpha, alpha1, alpha2)`` with their case label.

    ``alpha1`` relaxes the projection applied first (onto set B) and
    ``alpha2`` the one applied second (onto set A).
    """

    alpha: float
    alpha1: float
    alpha2: float
    case: str = field(init=False)

    def __post_init__(self):
        for name in ("alpha", "alpha1", "alpha2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "case", _case(self.alpha, self.alpha1, self.alpha2))

    @property
    def valid(self) -> bool:
        return self.case != INVALID

    def require_valid(self) -> "GapParams":
        if not self.valid:
            raise InvalidParametersError(
                f"parameters ({self.alpha}, {self.alpha1}, {self.alpha2}) "
                "are outside cases B1-B3")
        return self

    def as_tuple(self):
        return (self.alpha, self.alpha1, self.alpha2)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "alpha1": self.alpha1,
                "alpha2": self.alpha2, "case": self.case}


def classify_params(alpha: float, alpha1: float, alpha2: float) -> GapParams:
    """Classify a parameter triple into B1, B2, B3 or Invalid.

    B1: alpha in (0, 1], alpha1, alpha2 in (0, 2).
    B2: alpha in (0, 1), alpha1, alpha2 in (0, 2], not both equal to 2.
    B3: alpha in (0, 1), alpha1 = alpha2 = 2.
    B1 is checked first, so B2 only collects the extra boundary points.
    """
    return GapParams(alpha, alpha1, alpha2)


AP = GapParams(1.0, 1.0, 1.0)
