from dataclasses import dataclass
from fractions import Fraction

from common.errors import InvalidParameter
from mathutil.rationals import parse_rational

from .distribution import DiscreteDist, symmetrize


@dataclass(frozen=True)
class ConditionParams:
    """Constants of the anti-concentration condition P(c1 <= |xi - xi'| <= c2) >= c3."""

    c1: Fraction = Fraction(1)
    c2: Fraction = Fraction(2)
    c3: Fraction = Fraction(1, 2)

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        if not 0 < self.c1 < self.c2:
            raise InvalidParameter(f"Need 0 < c1 < c2, got c1={self.c1}, c2={self.c2}")
        if not 0 < self.c3 <= 1:
            raise InvalidParameter(f"Need 0 < c3 <= 1, got c3={self.c3}")


def check_condition(
    xi: DiscreteDist, params: ConditionParams | None = None
) -> tuple[Fraction, bool]:
    """Exact P(c1 <= |xi - xi'| <= c2) and whether it reaches c3."""
    params = params or ConditionParams()
    probability = sum(
        (m for v, m in symmetrize(xi).atoms if params.c1 <= abs(v) <= params.c2),
        Fraction(0),
    )
    return probability, probability >= params.c3
