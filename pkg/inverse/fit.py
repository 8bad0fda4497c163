import itertools
import math
from bisect import bisect_left
from collections.abc import Sequence
from fractions import Fraction

from common.errors import InvalidParameter, SearchSpaceExceeded, SizeMismatch
from gap.core import (
    Gap,
    GapPoint,
    gap_enumerate,
    point_at,
    singleton_gap,
    symmetric_gap,
)
from mathutil.rationals import (
    Vector,
    as_vector,
    dist_sq,
    exact_sqrt,
    is_zero,
    norm_sq,
    sqrt_bracket,
    vec_scale,
    zero_vector,
)

from .structures import FitParams, GapFit


def fit_gap_linear(points: Sequence, params: FitParams) -> GapFit | None:
    """Find a small symmetric proper GAP that most points are beta-close to.

    Generators have the form beta * (m_1, ..., m_d) / p with 1 <= p <= p_max and
    |m| <= params.step_bound(d). Ranks are searched upwards; the best fit covers the
    most points, then has the smallest rank, volume and generators. Returns None
    when no candidate covers n - n_prime points.
    """
    points = [as_vector(p) for p in points]
    if not points:
        raise InvalidParameter("Cannot fit a GAP to an empty point set")
    dim = len(points[0])
    if any(len(p) != dim for p in points):
        raise SizeMismatch("All points must share one dimension")
    n = len(points)
    if params.n_prime >= n:
        raise InvalidParameter(f"n_prime = {params.n_prime} must be below n = {n}")

    # Points at the origin are covered by the zero GAP
    if all(is_zero(p) for p in points):
        Q = singleton_gap(zero_vector(dim))
        origin = point_at(Q, ())
        return GapFit(
            gap=Q, covered=tuple(range(n)), assignments={i: origin for i in range(n)}
        )

    scaled, scale = normalize_points(points)
    beta = params.beta / scale
    steps = candidate_steps(beta, dim, params)
    count = count_candidates(len(steps), params)
    if count > params.search_ceiling:
        raise SearchSpaceExceeded(
            f"{count} candidate GAPs exceed the search ceiling {params.search_ceiling}"
        )

    best = None
    for rank in range(params.r_max + 1):
        for Q in _candidate_gaps(rank, steps, dim, params):
            assignments = _cover(Q, scaled, beta, params.size_cap)
            if assignments is None:
                continue
            key = (-len(assignments), rank, _volume(Q), Q.generators, Q.dimensions)
            if best is None or key < best[0]:
                best = (key, Q, assignments)
        if best is not None and len(best[2]) == n:
            break

    if best is None or len(best[2]) < n - params.n_prime:
        return None

    # Undo the normalization on the generators; coordinates are unchanged
    _, Q, assignments = best
    if Q.rank == 0:
        fitted = Q
    else:
        generators = [vec_scale(scale, g) for g in Q.generators]
        fitted = symmetric_gap(generators, Q.dimensions)
    return GapFit(
        gap=fitted,
        covered=tuple(sorted(assignments)),
        assignments={
            i: point_at(fitted, p.coords) for i, p in sorted(assignments.items())
        },
    )


def normalize_points(points: Sequence[Vector]) -> tuple[list[Vector], Fraction]:
    """Rescale so the squared norms sum to (about) 1.

    The scale is the exact root of sum |a_i|^2 when it is rational, else the upper
    end of a certified rational bracket, so the rescaling is exactly invertible.
    """
    total = sum((norm_sq(p) for p in points), Fraction(0))
    if total == 0:
        return list(points), Fraction(1)
    scale = exact_sqrt(total)
    if scale is None:
        scale = sqrt_bracket(total)[1]
    return [vec_scale(1 / scale, p) for p in points], scale


def candidate_steps(beta: Fraction, dim: int, params: FitParams) -> list[Vector]:
    """Distinct nonzero steps beta * m / p, first nonzero entry positive, sorted."""
    if beta == 0:
        return []
    steps = set()
    bound = params.step_bound(dim)
    for p in range(1, params.p_max + 1):
        for m in itertools.product(range(-bound, bound + 1), repeat=dim):
            if all(x == 0 for x in m):
                continue
            lead = next(x for x in m if x != 0)
            if lead < 0:
                continue
            steps.add(tuple(beta * Fraction(x, p) for x in m))
    return sorted(steps)


def count_candidates(step_count: int, params: FitParams) -> int:
    """Upper bound on the number of candidate GAPs, before volume filtering."""
    return 1 + sum(
        math.comb(step_count, r) * params.k_max**r for r in range(1, params.r_max + 1)
    )


def _candidate_gaps(rank: int, steps: list[Vector], dim: int, params: FitParams):
    if rank == 0:
        yield singleton_gap(zero_vector(dim))
        return
    for generators in itertools.combinations(steps, rank):
        for dimensions in itertools.product(range(1, params.k_max + 1), repeat=rank):
            if math.prod(2 * K + 1 for K in dimensions) > params.size_cap:
                continue
            yield symmetric_gap(generators, dimensions)


def _volume(Q: Gap) -> int:
    return math.prod(2 * K + 1 for K in Q.dimensions)


def _cover(
    Q: Gap, points: Sequence[Vector], beta: Fraction, cap: int
) -> dict[int, GapPoint] | None:
    """Nearest GAP point for every beta-close input point; None if Q is improper."""
    elements = gap_enumerate(Q, cap)
    if len({e.value for e in elements}) != len(elements):
        return None
    radius_sq = beta * beta
    assignments = dict()
    if Q.ambient_dim == 1:
        # Sort by value; ties cannot occur in a proper GAP
        elements = sorted(elements, key=lambda e: e.value)
        values = [e.value[0] for e in elements]
        for i, a in enumerate(points):
            at = bisect_left(values, a[0])
            nearby = [elements[j] for j in (at - 1, at) if 0 <= j < len(elements)]
            nearest = min(nearby, key=lambda e: (dist_sq(e.value, a), e.coords))
            if dist_sq(nearest.value, a) <= radius_sq:
                assignments[i] = nearest
        return assignments
    for i, a in enumerate(points):
        # Enumeration is lexicographic, so min keeps the smallest coords on ties
        nearest = min(elements, key=lambda e: dist_sq(e.value, a))
        if dist_sq(nearest.value, a) <= radius_sq:
            assignments[i] = nearest
    return assignments
