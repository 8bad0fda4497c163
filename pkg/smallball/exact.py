import itertools
import math
from bisect import bisect_left, bisect_right
from collections import defaultdict
from collections.abc import Iterable, Sequence
from fractions import Fraction

from common.budgets import DEFAULT_BUDGET, MEET_IN_THE_MIDDLE_MIN_N
from common.errors import BudgetExceeded, InvalidParameter
from mathutil.parallel import parallel_map
from mathutil.rationals import Vector, dist_sq, zero_vector
from randvar.distribution import DiscreteDist

from .forms import (
    BILINEAR,
    EXACT,
    EXACT_BRACKET,
    LINEAR,
    QUADRATIC,
    SmallBallEstimate,
    SmallBallQuery,
)
from .parameters import CHUNK_PREFIX

Law = dict[Vector, Fraction]
Atoms = tuple[tuple[Fraction, Fraction], ...]


def rho_exact(query: SmallBallQuery, budget: int = DEFAULT_BUDGET) -> SmallBallEstimate:
    """Exact small-ball probability of any form by outcome enumeration."""
    law = form_distribution(query, budget)
    return estimate_from_law(law, query.beta, query.center)


def rho_linear_exact(
    query: SmallBallQuery, budget: int = DEFAULT_BUDGET
) -> SmallBallEstimate:
    _check_form(query, LINEAR)
    return rho_exact(query, budget)


def rho_bilinear_exact(
    query: SmallBallQuery, budget: int = DEFAULT_BUDGET
) -> SmallBallEstimate:
    _check_form(query, BILINEAR)
    return rho_exact(query, budget)


def rho_quadratic_exact(
    query: SmallBallQuery, budget: int = DEFAULT_BUDGET
) -> SmallBallEstimate:
    _check_form(query, QUADRATIC)
    return rho_exact(query, budget)


def _check_form(query: SmallBallQuery, form: str):
    if query.form != form:
        raise InvalidParameter(f"Expected a {form} form, got {query.form}")


def form_distribution(query: SmallBallQuery, budget: int = DEFAULT_BUDGET) -> Law:
    """The exact law of the form value, as a map value -> mass."""
    if query.form == LINEAR:
        return linear_law(query.coefficients.entries, query.dist, budget)
    if query.form == BILINEAR:
        return _bilinear_law(query, budget)
    return _quadratic_law(query, budget)


# Linear forms
# ------------


def linear_law(
    entries: Sequence[Vector], dist: DiscreteDist, budget: int = DEFAULT_BUDGET
) -> Law:
    """The law of sum(a_i x_i) with x_i iid from `dist`."""
    n = len(entries)
    s = dist.support_size
    dim = len(entries[0])
    if s**n <= budget:
        return _linear_dp(entries, dist.atoms, dim)

    # Meet in the middle: aggregate both halves separately, then combine
    half = math.ceil(n / 2)
    if n >= MEET_IN_THE_MIDDLE_MIN_N and s**half <= budget:
        left = _linear_dp(entries[:half], dist.atoms, dim)
        right = _linear_dp(entries[half:], dist.atoms, dim)
        return convolve_laws(left, right)

    raise BudgetExceeded(f"{s}^{n} outcomes exceed the budget {budget}")


def _linear_dp(entries: Sequence[Vector], atoms: Atoms, dim: int) -> Law:
    law = {zero_vector(dim): Fraction(1)}
    for a in entries:
        step = defaultdict(Fraction)
        for value, mass in law.items():
            for x, p in atoms:
                step[_shift(value, x, a)] += mass * p
        law = dict(step)
    return law


def _shift(value: Vector, x: Fraction, a: Vector) -> Vector:
    if x == 0:
        return value
    return tuple(v + x * c for v, c in zip(value, a, strict=True))


def convolve_laws(left: Law, right: Law) -> Law:
    """The law of the sum of two independent vector-valued variables."""
    law = defaultdict(Fraction)
    for u, m in left.items():
        for v, w in right.items():
            law[tuple(a + b for a, b in zip(u, v, strict=True))] += m * w
    return dict(law)


def merge_laws(laws: Iterable[Law]) -> Law:
    """Add up sub-probability laws over disjoint parts of the outcome space."""
    merged = defaultdict(Fraction)
    for law in laws:
        for value, mass in law.items():
            merged[value] += mass
    return dict(merged)


# Bilinear and quadratic forms
# ----------------------------


def _bilinear_law(query: SmallBallQuery, budget: int) -> Law:
    n = query.n
    work = query.dist.support_size**n * query.y_dist.support_size**n
    if work > budget:
        raise BudgetExceeded(f"{work} outcomes exceed the budget {budget}")
    tasks = [
        (
            query.coefficients.entries,
            query.dist.atoms,
            query.y_dist.atoms,
            prefix,
            n,
            query.dim,
        )
        for prefix in _prefixes(query.y_dist.atoms, n)
    ]
    return merge_laws(parallel_map(_bilinear_chunk, tasks, work=work))


def _bilinear_chunk(task) -> Law:
    """Per-y linear laws for every y extending a fixed prefix."""
    entries, x_atoms, y_atoms, prefix, n, dim = task
    cache = dict()
    law = defaultdict(Fraction)
    for y, mass in _extensions(prefix, y_atoms, n):
        projected = tuple(
            tuple(
                sum((y[j] * entries[i][j][k] for j in range(n) if y[j]), Fraction(0))
                for k in range(dim)
            )
            for i in range(n)
        )
        if projected not in cache:
            cache[projected] = _linear_dp(projected, x_atoms, dim)
        for value, p in cache[projected].items():
            law[value] += mass * p
    return dict(law)


def _quadratic_law(query: SmallBallQuery, budget: int) -> Law:
    n = query.n
    work = query.dist.support_size**n
    if work > budget:
        raise BudgetExceeded(f"{work} outcomes exceed the budget {budget}")
    tasks = [
        (
            query.coefficients.entries,
            query.linear_part.entries,
            query.dist.atoms,
            prefix,
            n,
            query.dim,
        )
        for prefix in _prefixes(query.dist.atoms, n)
    ]
    return merge_laws(parallel_map(_quadratic_chunk, tasks, work=work))


def _quadratic_chunk(task) -> Law:
    """Values of sum(a_ij x_i x_j) + sum(b_i x_i) for every x extending a prefix."""
    entries, b, atoms, prefix, n, dim = task
    law = defaultdict(Fraction)
    for x, mass in _extensions(prefix, atoms, n):
        value = [Fraction(0)] * dim
        for i in range(n):
            if x[i] == 0:
                continue
            for k in range(dim):
                inner = b[i][k]
                for j in range(n):
                    if x[j]:
                        inner += entries[i][j][k] * x[j]
                value[k] += x[i] * inner
        law[tuple(value)] += mass
    return dict(law)


def _prefixes(atoms: Atoms, n: int) -> list[tuple]:
    """Chunk keys: every assignment of the first few variables, in mixed-radix order."""
    return list(itertools.product(atoms, repeat=min(CHUNK_PREFIX, n)))


def _extensions(prefix, atoms: Atoms, n: int):
    """Yield (values, mass) for all outcomes starting with the given prefix."""
    head_values = tuple(v for v, _ in prefix)
    head_mass = math.prod((m for _, m in prefix), start=Fraction(1))
    for tail in itertools.product(atoms, repeat=n - len(prefix)):
        values = head_values + tuple(v for v, _ in tail)
        mass = head_mass * math.prod((m for _, m in tail), start=Fraction(1))
        yield values, mass


# Centers
# -------


def ball_mass(law: Law, center: Vector, beta: Fraction) -> Fraction:
    """Exact mass of the closed ball B(center, beta)."""
    radius_sq = beta * beta
    return sum(
        (m for v, m in law.items() if dist_sq(v, center) <= radius_sq), Fraction(0)
    )


def sup_ball_mass(law: Law, beta: Fraction) -> Fraction:
    """Exact sup over centers of the ball mass in dimension 1 (sliding window)."""
    atoms = sorted((v[0], m) for v, m in law.items())
    best = window = Fraction(0)
    right = 0
    for left in range(len(atoms)):
        while right < len(atoms) and atoms[right][0] - atoms[left][0] <= 2 * beta:
            window += atoms[right][1]
            right += 1
        best = max(best, window)
        window -= atoms[left][1]
    return best


def bracket_ball_mass(law: Law, beta: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on the sup ball mass: best atom-centered beta-ball and 2beta-ball.

    Any ball of positive mass contains an atom c and so lies inside B(c, 2 beta).
    """
    atoms = sorted(law.items())
    firsts = [v[0] for v, _ in atoms]
    inner_sq, outer_sq = beta * beta, 4 * beta * beta
    lower = upper = Fraction(0)
    for c, _ in atoms:
        lo = bisect_left(firsts, c[0] - 2 * beta)
        hi = bisect_right(firsts, c[0] + 2 * beta)
        inner = outer = Fraction(0)
        for v, m in atoms[lo:hi]:
            d = dist_sq(v, c)
            if d <= inner_sq:
                inner += m
            if d <= outer_sq:
                outer += m
        lower = max(lower, inner)
        upper = max(upper, outer)
    return lower, upper


def estimate_from_law(
    law: Law, beta: Fraction, center: Vector | None = None
) -> SmallBallEstimate:
    """Turn an exact law into a fixed-center value, a sup value or a sup bracket."""
    if center is not None:
        return SmallBallEstimate(kind=EXACT, value=ball_mass(law, center, beta))
    dim = len(next(iter(law)))
    if dim == 1:
        return SmallBallEstimate(kind=EXACT, value=sup_ball_mass(law, beta))
    lower, upper = bracket_ball_mass(law, beta)
    if lower == upper:
        return SmallBallEstimate(kind=EXACT, value=lower)
    return SmallBallEstimate(kind=EXACT_BRACKET, value=lower, lower=lower, upper=upper)


def sup_lower_bound(estimate: SmallBallEstimate) -> Fraction:
    """The certified lower end of an exact estimate."""
    return estimate.lower if estimate.kind == EXACT_BRACKET else estimate.value
