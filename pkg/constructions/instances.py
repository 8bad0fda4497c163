from dataclasses import dataclass
from fractions import Fraction

from gap.core import Gap
from mathutil.rationals import Vector
from smallball.forms import CoeffMatrix, CoeffVector


@dataclass(frozen=True)
class StructuredInstance:
    """A planted instance with a pigeonhole lower bound on its small-ball probability.

    `witness_center` is a center at which the form lands with probability at least
    `claimed_rho_lower` within radius `claimed_beta`, for Bernoulli x and b = 0.
    `hidden` holds the planted data in JSON-ready form.
    """

    kind: str
    coefficients: CoeffVector | CoeffMatrix
    gap: Gap | None
    delta: Fraction
    hidden: dict
    claimed_beta: Fraction
    claimed_rho_lower: Fraction
    witness_center: Vector
