import itertools
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from common.budgets import DEFAULT_BUDGET, DEFAULT_GAP_CAP
from common.errors import (
    BudgetExceeded,
    InfeasibleK,
    InvalidParameter,
    NotProper,
    NotSymmetric,
    SizeMismatch,
    VolumeExceedsCap,
)
from gap.core import Gap, dilate, gap_volume, is_proper, point_at
from mathutil.rationals import (
    Vector,
    format_rational,
    parse_rational,
    vec_add,
    vec_scale,
    zero_vector,
)
from randvar.distribution import bernoulli_lazy
from smallball.exact import linear_law, rho_exact
from smallball.forms import (
    LINEAR,
    QUADRATIC,
    CoeffMatrix,
    CoeffVector,
    SmallBallQuery,
)

from .instances import StructuredInstance
from .parameters import LINEAR_GAP, MAX_K_ENTRY, MIXED, QUADRATIC_GAP, RANK_ONE
from .perturb import lattice_perturbation

SIGNS = (Fraction(-1), Fraction(1))


def build_linear_gap_instance(
    n: int, Q: Gap, delta, seed: int, cap: int = DEFAULT_GAP_CAP
) -> StructuredInstance:
    """Coefficients a_i within delta of seeded points q_i of Q.

    Sum q_i x_i lies in nQ for Bernoulli x, so some value of nQ is hit with
    probability at least 1 / Vol(nQ).
    """
    delta = _check_inputs(n, Q, delta, cap)
    volume = _dilated_volume(Q, n, cap)
    rng = np.random.default_rng(seed)

    planted = [_random_point(rng, Q) for _ in range(n)]
    entries = tuple(
        vec_add(q.value, lattice_perturbation(rng, Q.ambient_dim, delta))
        for q in planted
    )

    law = linear_law([q.value for q in planted], bernoulli_lazy(1))
    return StructuredInstance(
        kind=LINEAR_GAP,
        coefficients=CoeffVector(entries=entries),
        gap=Q,
        delta=delta,
        hidden={
            "coords": [list(q.coords) for q in planted],
            "q": [_format_vector(q.value) for q in planted],
        },
        claimed_beta=n * delta,
        claimed_rho_lower=Fraction(1, volume),
        witness_center=_mode(law),
    )


def build_quadratic_gap_instance(
    n: int, Q: Gap, delta, seed: int, cap: int = DEFAULT_GAP_CAP
) -> StructuredInstance:
    """A symmetric matrix a_ij within delta of seeded points q_ij of Q.

    Sum q_ij x_i x_j lies in n^2 Q, giving the bound 1 / Vol(n^2 Q).
    """
    return build_mixed_instance(n, Q, 0, [], [], delta, seed, cap)


def build_rank_one_instance(
    n: int, k: Sequence[int], b: CoeffVector, delta, seed: int
) -> StructuredInstance:
    """The matrix q_ij = k_i b_j + k_j b_i, perturbed by delta.

    The form factors as 2 (sum k_i x_i)(sum b_j x_j), so it vanishes whenever
    sum k_i x_i does.
    """
    k = _check_k([k], n)[0]
    if b.n != n:
        raise SizeMismatch(f"Expected {n} vectors b_i, got {b.n}")
    delta = parse_rational(delta)
    if delta < 0:
        raise InvalidParameter(f"delta must be non-negative, got {delta}")

    probability = _kernel_probability([k], n)
    if probability == 0:
        raise InfeasibleK(f"sum k_i x_i never vanishes for k = {list(k)}")

    rng = np.random.default_rng(seed)
    planted = _algebraic_part([k], [b.entries], n, b.dim)
    entries = _perturbed_matrix(rng, planted, delta)
    return StructuredInstance(
        kind=RANK_ONE,
        coefficients=CoeffMatrix(entries=entries),
        gap=None,
        delta=delta,
        hidden={
            "k": list(k),
            "b": [_format_vector(v) for v in b.entries],
        },
        claimed_beta=n * n * delta,
        claimed_rho_lower=probability,
        witness_center=zero_vector(b.dim),
    )


def build_mixed_instance(
    n: int,
    Q: Gap,
    r: int,
    K: Sequence[Sequence[int]],
    B: Sequence[CoeffVector | Sequence[Vector]],
    delta,
    seed: int,
    cap: int = DEFAULT_GAP_CAP,
) -> StructuredInstance:
    """q_ij = q'_ij + sum_s (k_is b_sj + k_js b_si) with q'_ij in Q, perturbed by delta.

    On the event that every sum_i k_is x_i vanishes, the form equals
    sum q'_ij x_i x_j, which lies in n^2 Q. The claimed bound is
    P(joint kernel) / Vol(n^2 Q).
    """
    delta = _check_inputs(n, Q, delta, cap)
    if len(K) != r or len(B) != r:
        raise SizeMismatch(f"Expected {r} rows of k and b, got {len(K)} and {len(B)}")
    K = _check_k(K, n)
    B = [_as_entries(row) for row in B]
    if any(len(row) != n for row in B):
        raise SizeMismatch(f"Every row of b must have {n} entries")
    if any(len(v) != Q.ambient_dim for row in B for v in row):
        raise SizeMismatch("Vectors b_si must live in the GAP's ambient dimension")

    volume = _dilated_volume(Q, n * n, cap)
    probability = _kernel_probability(K, n)
    if probability == 0:
        raise InfeasibleK("The sums sum_i k_is x_i never vanish together")

    rng = np.random.default_rng(seed)
    coords = dict()
    gap_part = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            point = _random_point(rng, Q)
            coords[(i, j)] = list(point.coords)
            gap_part[i][j] = gap_part[j][i] = point.value

    algebraic = _algebraic_part(K, B, n, Q.ambient_dim)
    planted = tuple(
        tuple(vec_add(gap_part[i][j], algebraic[i][j]) for j in range(n))
        for i in range(n)
    )
    entries = _perturbed_matrix(rng, planted, delta)

    hidden = {
        "coords": [[i, j, c] for (i, j), c in sorted(coords.items())],
        "q_prime": [[_format_vector(v) for v in row] for row in gap_part],
    }
    if r > 0:
        hidden["k"] = [list(row) for row in K]
        hidden["b"] = [[_format_vector(v) for v in row] for row in B]

    return StructuredInstance(
        kind=MIXED if r > 0 else QUADRATIC_GAP,
        coefficients=CoeffMatrix(entries=entries),
        gap=Q,
        delta=delta,
        hidden=hidden,
        claimed_beta=n * n * delta,
        claimed_rho_lower=probability / volume,
        witness_center=_restricted_quadratic_mode(gap_part, K, n, Q.ambient_dim),
    )


@dataclass(frozen=True)
class InstanceCheck:
    witness_rho: Fraction
    claimed_rho_lower: Fraction
    satisfied: bool


def certify_instance(
    instance: StructuredInstance, budget: int = DEFAULT_BUDGET
) -> InstanceCheck:
    """Exact probability at the witness center and radius claimed_beta vs the claim."""
    form = LINEAR if instance.kind == LINEAR_GAP else QUADRATIC
    query = SmallBallQuery(
        beta=instance.claimed_beta,
        form=form,
        coefficients=instance.coefficients,
        dist=bernoulli_lazy(1),
        center=instance.witness_center,
    )
    rho = rho_exact(query, budget).value
    return InstanceCheck(
        witness_rho=rho,
        claimed_rho_lower=instance.claimed_rho_lower,
        satisfied=rho >= instance.claimed_rho_lower,
    )


def _check_inputs(n: int, Q: Gap, delta, cap: int) -> Fraction:
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    if not Q.symmetric:
        raise NotSymmetric("Planted GAPs must be symmetric")
    if not is_proper(Q, cap):
        raise NotProper("Planted GAPs must be proper")
    delta = parse_rational(delta)
    if delta < 0:
        raise InvalidParameter(f"delta must be non-negative, got {delta}")
    return delta


def _dilated_volume(Q: Gap, m: int, cap: int) -> int:
    volume = gap_volume(dilate(Q, m))
    if volume > cap:
        raise VolumeExceedsCap(f"Vol({m}Q) = {volume} exceeds the cap {cap}")
    return volume


def _check_k(K: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    rows = []
    for row in K:
        row = tuple(int(k) for k in row)
        if len(row) != n:
            raise SizeMismatch(f"Expected {n} integers k_i, got {len(row)}")
        if any(abs(k) > MAX_K_ENTRY for k in row):
            raise InvalidParameter(f"Entries of k must satisfy |k_i| <= {MAX_K_ENTRY}")
        rows.append(row)
    return rows


def _as_entries(row: CoeffVector | Sequence[Vector]) -> tuple[Vector, ...]:
    if isinstance(row, CoeffVector):
        return row.entries
    return tuple(tuple(parse_rational(a) for a in v) for v in row)


def _random_point(rng: np.random.Generator, Q: Gap):
    coords = [
        int(rng.integers(lo, hi + 1))
        for lo, hi in zip(Q.lower_bounds, Q.upper_bounds, strict=True)
    ]
    return point_at(Q, coords)


def _kernel_probability(K: Sequence[Sequence[int]], n: int) -> Fraction:
    """Exact P(sum_i k_is x_i = 0 for every s) for Bernoulli x."""
    if not K:
        return Fraction(1)
    columns = [tuple(Fraction(row[i]) for row in K) for i in range(n)]
    law = linear_law(columns, bernoulli_lazy(1))
    return law.get(zero_vector(len(K)), Fraction(0))


def _algebraic_part(
    K: Sequence[Sequence[int]], B: Sequence[Sequence[Vector]], n: int, dim: int
) -> list[list[Vector]]:
    """sum_s (k_is b_sj + k_js b_si) for every pair (i, j)."""
    part = [[zero_vector(dim) for _ in range(n)] for _ in range(n)]
    for k, b in zip(K, B, strict=True):
        for i in range(n):
            for j in range(n):
                term = vec_add(vec_scale(k[i], b[j]), vec_scale(k[j], b[i]))
                part[i][j] = vec_add(part[i][j], term)
    return part


def _perturbed_matrix(
    rng: np.random.Generator, planted: Sequence[Sequence[Vector]], delta: Fraction
) -> tuple[tuple[Vector, ...], ...]:
    n = len(planted)
    dim = len(planted[0][0])
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            value = vec_add(planted[i][j], lattice_perturbation(rng, dim, delta))
            entries[i][j] = entries[j][i] = value
    return tuple(tuple(row) for row in entries)


def _restricted_quadratic_mode(
    gap_part: Sequence[Sequence[Vector]],
    K: Sequence[Sequence[int]],
    n: int,
    dim: int,
) -> Vector:
    """Mode of sum q'_ij x_i x_j over the sign vectors in the joint kernel of K."""
    if 2**n > DEFAULT_BUDGET:
        raise BudgetExceeded(f"2^{n} sign vectors exceed the budget {DEFAULT_BUDGET}")
    law = defaultdict(int)
    for x in itertools.product(SIGNS, repeat=n):
        if any(sum(k[i] * x[i] for i in range(n)) != 0 for k in K):
            continue
        value = zero_vector(dim)
        for i in range(n):
            for j in range(n):
                value = vec_add(value, vec_scale(x[i] * x[j], gap_part[i][j]))
        law[value] += 1
    return _mode(law)


def _mode(law: dict) -> Vector:
    """The most likely value, smallest value first among ties."""
    return min(law.items(), key=lambda item: (-item[1], item[0]))[0]


def _format_vector(v: Vector) -> list[str]:
    return [format_rational(a) for a in v]
