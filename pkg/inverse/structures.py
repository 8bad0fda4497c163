from dataclasses import dataclass, field, fields
from fractions import Fraction

from common.errors import InvalidParameter
from gap.core import Gap, GapPoint
from mathutil.rationals import parse_rational

from .parameters import (
    B_EXPONENT,
    C_EXPONENT,
    EPSILON,
    K_MAX,
    M_MAX_BY_DIM,
    N_PRIME,
    P_MAX,
    R_MAX,
    SEARCH_CEILING,
    SIZE_CAP,
)


@dataclass(frozen=True)
class FitParams:
    """Search bounds for GAP fitting and the exponents used for thresholds.

    Leaving m_max unset shrinks the step grid as the point dimension grows, so the
    default search fits under the ceiling up to dimension 4.
    """

    beta: Fraction
    r_max: int = R_MAX
    p_max: int = P_MAX
    m_max: int | None = None
    k_max: int = K_MAX
    size_cap: int = SIZE_CAP
    n_prime: int = N_PRIME
    B: Fraction = Fraction(B_EXPONENT)
    C: int = C_EXPONENT
    epsilon: Fraction = parse_rational(EPSILON)
    search_ceiling: int = SEARCH_CEILING

    def __post_init__(self):
        for name in ("beta", "B", "epsilon"):
            object.__setattr__(self, name, parse_rational(getattr(self, name)))
        if self.beta < 0:
            raise InvalidParameter(f"beta must be non-negative, got {self.beta}")
        for name in ("p_max", "m_max", "k_max", "size_cap", "search_ceiling"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InvalidParameter(f"{name} must be positive")
        if self.r_max < 0 or self.n_prime < 0 or self.C < 0:
            raise InvalidParameter("r_max, n_prime and C must be non-negative")
        if self.B <= 0 or self.epsilon <= 0:
            raise InvalidParameter("B and epsilon must be positive")

    @classmethod
    def from_dict(cls, parameters: dict) -> "FitParams":
        """Build from a parameters dict; missing fields take their defaults."""
        names = {f.name for f in fields(cls)}
        unknown = set(parameters) - names
        if unknown:
            raise InvalidParameter(f"Unknown fit parameters: {sorted(unknown)}")
        return cls(**parameters)

    def step_bound(self, dim: int) -> int:
        """Bound on the step numerators |m|: m_max, else the default for `dim`."""
        if self.m_max is not None:
            return self.m_max
        return M_MAX_BY_DIM.get(dim, 1)


@dataclass(frozen=True)
class GapFit:
    """A GAP that the covered points are beta-close to, with the nearest points."""

    gap: Gap
    covered: tuple[int, ...]
    assignments: dict[int, GapPoint]


@dataclass(frozen=True)
class StructureCertificate:
    """Integers k, pivot rows, per-row coefficients and the surviving index set.

    For each surviving i the combined row k row_i + sum_j row_coeffs[i][j] row_{i_j}
    is claimed to be small against a random vector, at radius beta n^C with
    probability at least n^-C, where C = bound_exponent.
    """

    k: int
    pivot_rows: tuple[int, ...]
    row_coeffs: dict[int, tuple[int, ...]]
    surviving: tuple[int, ...]
    bound_exponent: int


@dataclass
class PipelineTrace:
    """Supporting populations recorded while building a certificate."""

    rho: Fraction | None = None
    good_mass: Fraction = Fraction(0)
    good_vectors: list[dict] = field(default_factory=list)
    common_index_tuple: tuple[int, ...] = ()
    common_coeff_matrix: tuple[tuple[int, ...], ...] = ()
    common_mass: Fraction = Fraction(0)
    identities: dict[int, dict] = field(default_factory=dict)
    tight_exponent: int | None = None
    subset_votes: list[dict] = field(default_factory=list)
    verification: dict[str, dict] = field(default_factory=dict)
