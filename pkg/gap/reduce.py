from collections.abc import Sequence
from fractions import Fraction

from common.budgets import DEFAULT_GAP_CAP
from common.errors import NotProper, NotSymmetric
from mathutil.linalg import rank
from mathutil.rationals import (
    Vector,
    combine,
    primitive_integer_vector,
    vec_scale,
    vec_sub,
)

from .core import (
    Gap,
    GapPoint,
    gap_enumerate,
    gap_volume,
    is_proper,
    point_at,
    singleton_gap,
    symmetric_gap,
)
from .relations import find_integer_relation


def rank_reduce(
    Q: Gap, U: Sequence[GapPoint], cap: int = DEFAULT_GAP_CAP
) -> tuple[Gap, list[GapPoint]]:
    """Shrink a proper symmetric GAP until the points of U span it.

    Each round eliminates one generator using an integer relation satisfied by all
    coordinate tuples of U, then properizes. The values of U are kept exactly and
    re-expressed in the returned GAP.
    """
    if not Q.symmetric:
        raise NotSymmetric("Rank reduction needs a symmetric GAP")
    if not is_proper(Q, cap):
        raise NotProper("Rank reduction needs a proper GAP")

    points = [point_at(Q, u.coords) for u in U]
    values = [p.value for p in points]
    coords = [p.coords for p in points]

    # Points that all sit at the origin are spanned only by the zero GAP
    if all(all(k == 0 for k in c) for c in coords):
        Q = singleton_gap(Q.offset)
        return Q, [point_at(Q, ()) for _ in points]

    generators = list(Q.generators)
    dimensions = list(Q.dimensions)
    while generators and rank(coords, len(generators)) < len(generators):
        alpha = find_integer_relation(coords, len(generators))

        # Substitute g_i -> g_i - alpha_i * w with w = g_j / alpha_j, then drop j
        j = max(i for i, a in enumerate(alpha) if a != 0)
        w = vec_scale(Fraction(1, alpha[j]), generators[j])
        generators = [
            vec_sub(g, vec_scale(alpha[i], w))
            for i, g in enumerate(generators)
            if i != j
        ]
        dimensions = [K for i, K in enumerate(dimensions) if i != j]
        coords = [tuple(k for i, k in enumerate(c) if i != j) for c in coords]

        reduced, transform = _properize(
            _build(Q.ambient_dim, generators, dimensions), cap
        )
        generators = list(reduced.generators)
        dimensions = list(reduced.dimensions)
        coords = [transform(c) for c in coords]

    Q_star = _build(Q.ambient_dim, generators, dimensions)
    U_star = [
        GapPoint(coords=c, value=v) for c, v in zip(coords, values, strict=True)
    ]
    return Q_star, U_star


def properize(Q: Gap, cap: int = DEFAULT_GAP_CAP) -> Gap:
    """A proper symmetric GAP of rank at most rank(Q) containing every point of Q."""
    if not Q.symmetric:
        raise NotSymmetric("Properization needs a symmetric GAP")
    properized, _ = _properize(Q, cap)
    return properized


def volume_blowup(Q: Gap, Q_star: Gap) -> Fraction:
    """The achieved volume factor gap_volume(Q*) / gap_volume(Q)."""
    return Fraction(gap_volume(Q_star), gap_volume(Q))


def _properize(Q: Gap, cap: int):
    """Properize Q and return it with the map taking old coordinates to new ones."""
    steps = []
    while True:
        collision = _find_collision(Q, cap)
        if collision is None:
            break
        alpha = primitive_integer_vector(
            [a - b for a, b in zip(collision[0], collision[1], strict=True)]
        )
        Q, V = _eliminate(Q, alpha)
        steps.append(V)

    def transform(coords: tuple[int, ...]) -> tuple[int, ...]:
        for V in steps:
            coords = _change_basis(coords, V)
        return coords

    return Q, transform


def _find_collision(Q: Gap, cap: int):
    """The first pair of coordinate tuples with equal values, in enumeration order."""
    seen = dict()
    for point in gap_enumerate(Q, cap):
        if point.value in seen:
            return seen[point.value], point.coords
        seen[point.value] = point.coords
    return None


def _eliminate(Q: Gap, alpha: tuple[int, ...]) -> tuple[Gap, list[list[int]]]:
    """Drop one generator using the relation sum(alpha_i g_i) = 0.

    A unimodular V with alpha V = e_1 is built by column operations, tracking its
    inverse W. New generators are the rows of W G after the first, which is zero.
    New coordinates are k V without the first entry, and the new bounds
    K'_l = sum_i |V_il| K_i keep every old point inside.
    """
    r = Q.rank
    a = list(alpha)
    V = [[int(i == j) for j in range(r)] for i in range(r)]
    W = [[int(i == j) for j in range(r)] for i in range(r)]

    while sum(1 for x in a if x != 0) > 1:
        i = min((abs(x), idx) for idx, x in enumerate(a) if x != 0)[1]
        for j in range(r):
            if j == i or a[j] == 0:
                continue
            q = a[j] // a[i]
            # Column op: col_j -= q * col_i; the inverse adds q * row_j to row_i
            a[j] -= q * a[i]
            for row in V:
                row[j] -= q * row[i]
            W[i] = [x + q * y for x, y in zip(W[i], W[j], strict=True)]

    # Move the remaining entry (which is +-1) to the front
    lead = next(idx for idx, x in enumerate(a) if x != 0)
    if lead != 0:
        a[0], a[lead] = a[lead], a[0]
        for row in V:
            row[0], row[lead] = row[lead], row[0]
        W[0], W[lead] = W[lead], W[0]
    if a[0] < 0:
        a[0] = -a[0]
        for row in V:
            row[0] = -row[0]
        W[0] = [-x for x in W[0]]

    generators = [combine(W[col], Q.generators, Q.ambient_dim) for col in range(1, r)]
    dimensions = [
        sum(abs(V[i][col]) * Q.dimensions[i] for i in range(r))
        for col in range(1, r)
    ]
    return _build(Q.ambient_dim, generators, dimensions), V


def _change_basis(coords: tuple[int, ...], V: list[list[int]]) -> tuple[int, ...]:
    r = len(coords)
    return tuple(
        sum(coords[i] * V[i][col] for i in range(r)) for col in range(1, r)
    )


def _build(dim: int, generators: Sequence[Vector], dimensions: Sequence[int]) -> Gap:
    if not generators:
        return singleton_gap((Fraction(0),) * dim)
    return symmetric_gap(generators, dimensions)

