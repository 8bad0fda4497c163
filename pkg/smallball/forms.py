from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from common.errors import InvalidParameter, NotSymmetric, SizeMismatch
from mathutil.rationals import Vector, as_vector, parse_rational, zero_vector
from randvar.distribution import DiscreteDist

LINEAR = "linear"
BILINEAR = "bilinear"
QUADRATIC = "quadratic"
FORMS = (LINEAR, BILINEAR, QUADRATIC)

EXACT = "exact"
EXACT_BRACKET = "exact_bracket"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class CoeffVector:
    """A length-n array of vectors in Q^d."""

    entries: tuple[Vector, ...]

    def __post_init__(self):
        if not self.entries:
            raise SizeMismatch("A coefficient vector needs at least one entry")
        if len({len(a) for a in self.entries}) != 1 or not self.entries[0]:
            raise SizeMismatch("All entries must share one positive dimension")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int:
        return len(self.entries[0])


@dataclass(frozen=True)
class CoeffMatrix:
    """An n x n array of vectors in Q^d, exactly symmetric when flagged."""

    entries: tuple[tuple[Vector, ...], ...]
    symmetric: bool = True

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise SizeMismatch("A coefficient matrix must be square and nonempty")
        dims = {len(a) for row in self.entries for a in row}
        if len(dims) != 1 or 0 in dims:
            raise SizeMismatch("All entries must share one positive dimension")
        if self.symmetric and any(
            self.entries[i][j] != self.entries[j][i]
            for i in range(n)
            for j in range(i)
        ):
            raise NotSymmetric("Matrix flagged symmetric has a_ij != a_ji")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def dim(self) -> int:
        return len(self.entries[0][0])

    def row(self, i: int) -> CoeffVector:
        return CoeffVector(entries=self.entries[i])


def coeff_vector(values: Sequence) -> CoeffVector:
    """Build a CoeffVector from scalars (d = 1) or sequences of rationals."""
    return CoeffVector(entries=tuple(as_vector(a) for a in values))


def coeff_matrix(rows: Sequence[Sequence], symmetric: bool = True) -> CoeffMatrix:
    """Build a CoeffMatrix from nested scalars (d = 1) or nested sequences."""
    return CoeffMatrix(
        entries=tuple(tuple(as_vector(a) for a in row) for row in rows),
        symmetric=symmetric,
    )


def zero_coeff_vector(n: int, dim: int = 1) -> CoeffVector:
    return CoeffVector(entries=(zero_vector(dim),) * n)


def zero_coeff_matrix(n: int, dim: int = 1) -> CoeffMatrix:
    return CoeffMatrix(entries=((zero_vector(dim),) * n,) * n)


@dataclass(frozen=True)
class SmallBallQuery:
    """A small-ball problem: P(|form(x) - center| <= beta), or its sup over centers.

    `center=None` asks for the sup over all centers. Bilinear forms draw y from
    `dist_y` (default: `dist`); quadratic forms add the linear part `b` (default 0).
    """

    beta: Fraction
    form: str
    coefficients: CoeffVector | CoeffMatrix
    dist: DiscreteDist
    b: CoeffVector | None = None
    center: Vector | None = None
    dist_y: DiscreteDist | None = None

    def __post_init__(self):
        object.__setattr__(self, "beta", parse_rational(self.beta))
        if self.beta < 0:
            raise InvalidParameter(f"beta must be non-negative, got {self.beta}")
        if self.form not in FORMS:
            raise InvalidParameter(f"Unknown form {self.form!r}")
        expected = CoeffVector if self.form == LINEAR else CoeffMatrix
        if not isinstance(self.coefficients, expected):
            raise SizeMismatch(f"A {self.form} form needs a {expected.__name__}")
        if self.center is not None:
            object.__setattr__(self, "center", as_vector(self.center))
            if len(self.center) != self.dim:
                raise SizeMismatch("Center dimension does not match the form")
        if self.b is not None:
            if self.form != QUADRATIC:
                raise InvalidParameter("Only quadratic forms take a linear part b")
            if self.b.n != self.n or self.b.dim != self.dim:
                raise SizeMismatch("Linear part b does not match the matrix")

    @property
    def n(self) -> int:
        return self.coefficients.n

    @property
    def dim(self) -> int:
        return self.coefficients.dim

    @property
    def y_dist(self) -> DiscreteDist:
        return self.dist_y or self.dist

    @property
    def linear_part(self) -> CoeffVector:
        return self.b or zero_coeff_vector(self.n, self.dim)


@dataclass(frozen=True)
class SmallBallEstimate:
    """An exact value, an exact bracket, or a Monte-Carlo estimate of rho."""

    kind: str
    value: Fraction | float
    lower: Fraction | None = None
    upper: Fraction | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if not 0 <= self.value <= 1:
            raise InvalidParameter(f"Probability out of range: {self.value}")
        if self.kind == EXACT_BRACKET and not self.lower <= self.upper:
            raise InvalidParameter("Bracket lower bound exceeds the upper bound")
