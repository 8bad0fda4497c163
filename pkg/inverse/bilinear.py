import itertools
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from common.budgets import DEFAULT_BUDGET
from common.errors import (
    BudgetExceeded,
    CoverageFloorMissed,
    InvalidParameter,
    NoGoodVectors,
    NoSpanningTuple,
)
from gap.core import GapPoint
from gap.reduce import rank_reduce
from mathutil.linalg import integer_det, rank
from mathutil.rationals import Vector, format_rational, norm_sq
from randvar.distribution import DiscreteDist
from smallball.exact import rho_exact, sup_lower_bound
from smallball.forms import BILINEAR, LINEAR, CoeffMatrix, CoeffVector, SmallBallQuery

from .fit import fit_gap_linear
from .parameters import EXACT, MAX_EXPONENT, REDUCE_CAP, SAMPLED, Y_SAMPLE
from .structures import FitParams, PipelineTrace, StructureCertificate
from .voting import at_least_power, floor_met, weighted_mode


@dataclass(frozen=True)
class _FittedVector:
    """A good y with its reduced GAP fit."""

    y: tuple[Fraction, ...]
    weight: Fraction
    projected: tuple[Vector, ...]
    rank: int
    covered: tuple[int, ...]
    assignments: dict[int, GapPoint]


def project(A: CoeffMatrix, y: Sequence[Fraction]) -> tuple[Vector, ...]:
    """The vectors row_i(A) . y = sum_j a_ij y_j for every row i."""
    return tuple(
        tuple(
            sum((y[j] * A.entries[i][j][k] for j in range(A.n) if y[j]), Fraction(0))
            for k in range(A.dim)
        )
        for i in range(A.n)
    )


def classify_good(
    A: CoeffMatrix,
    y: Sequence,
    rho: Fraction,
    beta,
    xi: DiscreteDist,
    budget: int = DEFAULT_BUDGET,
) -> bool:
    """Whether sup_a P_x(|sum_i x_i (row_i . y) - a| <= beta) >= rho / 4."""
    y = tuple(Fraction(v) for v in y)
    return _inner_rho(project(A, y), xi, beta, budget) >= Fraction(rho) / 4


def _inner_rho(
    projected: tuple[Vector, ...], xi: DiscreteDist, beta, budget: int
) -> Fraction:
    # In d >= 2 only the certified lower bracket end counts
    query = SmallBallQuery(
        beta=beta, form=LINEAR, coefficients=CoeffVector(entries=projected), dist=xi
    )
    return sup_lower_bound(rho_exact(query, budget))


def bilinear_certificate(
    A: CoeffMatrix,
    xi: DiscreteDist,
    beta,
    params: FitParams | None = None,
    mode: str = EXACT,
    seed: int = 0,
    count: int = Y_SAMPLE,
    rho: Fraction | None = None,
    budget: int = DEFAULT_BUDGET,
    log: bool = False,
) -> tuple[StructureCertificate, PipelineTrace]:
    """Extract a structure certificate from a concentrated bilinear form.

    y vectors are enumerated (or sampled) from xi^n; the good ones have their
    projected rows fitted by a GAP, which is reduced until the assigned points span
    it. The most common spanning index tuple and coefficient matrix are kept, and
    every surviving row gets the most common determinant identity.
    """
    params = params or FitParams(beta=beta)
    beta = params.beta
    n = A.n
    trace = PipelineTrace()

    # Hypothesis: rho >= n^-B
    if rho is None:
        query = SmallBallQuery(
            beta=beta, form=BILINEAR, coefficients=A, dist=xi, dist_y=xi
        )
        rho = sup_lower_bound(rho_exact(query, budget))
    rho = Fraction(rho)
    trace.rho = rho
    if not at_least_power(rho, n, -params.B):
        warnings.warn(f"rho = {rho} is below n^-B", UserWarning, stacklevel=2)

    # Good vectors and their reduced fits
    inner_cache = dict()
    fit_cache = dict()
    records = []
    for y, weight in _y_vectors(xi, n, mode, seed, count, budget):
        projected = project(A, y)
        if projected not in inner_cache:
            inner_cache[projected] = _inner_rho(projected, xi, beta, budget)
        if inner_cache[projected] < rho / 4:
            continue
        trace.good_mass += weight
        if projected not in fit_cache:
            fit_cache[projected] = _reduced_fit(projected, params)
        fit = fit_cache[projected]
        trace.good_vectors.append(
            {
                "y": [format_rational(v) for v in y],
                "weight": format_rational(weight),
                "rank": None if fit is None else fit[0],
                "covered": None if fit is None else list(fit[1]),
            }
        )
        if fit is not None:
            records.append(_FittedVector(y, weight, projected, *fit))

    if trace.good_mass == 0:
        raise NoGoodVectors("No y vector is good")
    if not records:
        raise NoSpanningTuple("No good y vector admits a GAP fit")
    if log:
        print(f"Good mass {trace.good_mass}, {len(records)} fitted y vectors")

    # Common generating indices
    tuples = [(r, _spanning_tuple(r)) for r in records]
    pivots = weighted_mode((t, r.weight) for r, t in tuples)
    spanning_records = [r for r, t in tuples if t == pivots]

    # Common coefficient tuple
    coeff_matrices = [(r, _coeff_matrix(r, pivots)) for r in spanning_records]
    C = weighted_mode((m, r.weight) for r, m in coeff_matrices)
    common_records = [r for r, m in coeff_matrices if m == C]
    k = integer_det(C)
    mass = sum((r.weight for r in common_records), Fraction(0))
    trace.common_index_tuple = pivots
    trace.common_coeff_matrix = C
    trace.common_mass = mass

    # Rows covered on at least half of the common mass
    def covered_mass(i: int) -> Fraction:
        weights = (r.weight for r in common_records if i in r.assignments)
        return sum(weights, Fraction(0))

    surviving = tuple(i for i in range(n) if 2 * covered_mass(i) >= mass)
    if not floor_met(len(surviving), n, params.epsilon):
        raise CoverageFloorMissed(
            f"{len(surviving)} surviving rows, below n - 2n^epsilon for n = {n}"
        )

    # Common identity per row
    row_coeffs = dict()
    for i in surviving:
        identities = [
            (r, _identity(C, r.assignments[i].coords))
            for r in common_records
            if i in r.assignments
        ]
        coeffs = weighted_mode((c, r.weight) for r, c in identities)
        support = [r for r, c in identities if c == coeffs]
        row_coeffs[i] = coeffs
        trace.identities[i] = {
            "coeffs": list(coeffs),
            "mass": format_rational(sum((r.weight for r in support), Fraction(0))),
            "residuals": [
                _combined(k, coeffs, pivots, i, r.projected) for r in support
            ],
        }

    # Re-check every supporting identity at the reported exponent
    tight = _tight_exponent(k, row_coeffs, trace.identities, beta, n)
    trace.tight_exponent = tight
    exponent = params.C if tight is None else max(params.C, tight)
    radius_sq = beta * beta * Fraction(n) ** (2 * exponent)
    for i in trace.identities:
        residuals = trace.identities[i].pop("residuals")
        trace.identities[i]["verified"] = all(
            norm_sq(w) <= radius_sq for w in residuals
        )

    certificate = StructureCertificate(
        k=k,
        pivot_rows=pivots,
        row_coeffs=row_coeffs,
        surviving=surviving,
        bound_exponent=exponent,
    )
    return certificate, trace


def _y_vectors(
    xi: DiscreteDist, n: int, mode: str, seed: int, count: int, budget: int
):
    """(y, weight) pairs: all of xi^n with exact masses, or `count` seeded draws."""
    if mode == EXACT:
        if xi.support_size**n > budget:
            raise BudgetExceeded(
                f"{xi.support_size}^{n} y vectors exceed the budget {budget}"
            )
        for outcome in itertools.product(xi.atoms, repeat=n):
            yield (
                tuple(v for v, _ in outcome),
                math.prod((m for _, m in outcome), start=Fraction(1)),
            )
    elif mode == SAMPLED:
        if count < 1:
            raise InvalidParameter(f"Need at least one sampled y, got {count}")
        rng = np.random.default_rng(seed)
        masses = np.array([float(m) for m in xi.masses])
        draws = rng.choice(xi.support_size, size=(count, n), p=masses / masses.sum())
        for row in draws:
            yield tuple(xi.values[int(j)] for j in row), Fraction(1, count)
    else:
        raise InvalidParameter(f"Unknown y mode {mode!r}")


def _reduced_fit(projected: tuple[Vector, ...], params: FitParams):
    """Fit a GAP and reduce it until the assigned points span it.

    Returns (rank, covered, assignments) or None when no fit reaches the floor.
    """
    fit = fit_gap_linear(projected, params)
    if fit is None:
        return None
    covered = fit.covered
    Q, points = rank_reduce(fit.gap, [fit.assignments[i] for i in covered], REDUCE_CAP)
    return Q.rank, covered, dict(zip(covered, points, strict=True))


def _spanning_tuple(record: "_FittedVector") -> tuple[int, ...]:
    """Greedy lexicographic choice of covered indices whose points span the GAP."""
    r, covered, assignments = record.rank, record.covered, record.assignments
    chosen = []
    for i in covered:
        if len(chosen) == r:
            break
        rows = [assignments[j].coords for j in chosen + [i]]
        if rank(rows, r) == len(chosen) + 1:
            chosen.append(i)
    return tuple(chosen)


def _coeff_matrix(
    record: "_FittedVector", pivots: tuple[int, ...]
) -> tuple[tuple[int, ...], ...]:
    return tuple(record.assignments[i].coords for i in pivots)


def _identity(
    C: tuple[tuple[int, ...], ...], v: tuple[int, ...]
) -> tuple[int, ...]:
    """k_j = -det(C with row j replaced by v), so k q + sum_j k_j q_j = 0."""
    return tuple(
        -integer_det([v if row == j else C[row] for row in range(len(C))])
        for j in range(len(C))
    )


def _combined(
    k: int,
    coeffs: tuple[int, ...],
    pivots: tuple[int, ...],
    i: int,
    projected: tuple[Vector, ...],
) -> Vector:
    """(k row_i + sum_j k_j row_{i_j}) . y from the projected rows."""
    dim = len(projected[i])
    total = [k * a for a in projected[i]]
    for c, p in zip(coeffs, pivots, strict=True):
        for t in range(dim):
            total[t] += c * projected[p][t]
    return tuple(total)


def _tight_exponent(
    k: int,
    row_coeffs: dict[int, tuple[int, ...]],
    identities: dict[int, dict],
    beta: Fraction,
    n: int,
) -> int | None:
    """Smallest C bounding every coefficient by n^C and every residual by beta n^C."""
    largest = max([abs(k)] + [abs(c) for cs in row_coeffs.values() for c in cs])
    residuals = [w for record in identities.values() for w in record["residuals"]]
    worst = max((norm_sq(w) for w in residuals), default=Fraction(0))
    for exponent in range(MAX_EXPONENT + 1):
        bound = Fraction(n) ** exponent
        if largest <= bound and worst <= beta * beta * bound * bound:
            return exponent
    return None

