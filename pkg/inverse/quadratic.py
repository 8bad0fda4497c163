import warnings
from collections import Counter
from fractions import Fraction

import numpy as np

from common.budgets import DEFAULT_BUDGET
from common.errors import (
    BudgetExceeded,
    CoverageFloorMissed,
    InsufficientSubsetConsensus,
    InvalidParameter,
    NoGoodVectors,
    NoSpanningTuple,
    NotSymmetric,
)
from decoupling.mask import SubsetMask, all_masks, mask_matrix
from mathutil.rationals import format_rational
from mathutil.seeds import child_seed
from randvar.distribution import (
    DiscreteDist,
    certificate_z_dist,
    scaled_certificate_z_dist,
    symmetrize,
)
from smallball.exact import rho_exact, sup_lower_bound
from smallball.forms import QUADRATIC, CoeffMatrix, SmallBallQuery

from .bilinear import bilinear_certificate
from .parameters import (
    EXACT,
    EXHAUSTIVE,
    EXHAUSTIVE_SUBSET_MAX_N,
    SAMPLED,
    SUBSET_SAMPLE,
    Y_SAMPLE,
)
from .structures import FitParams, PipelineTrace, StructureCertificate
from .verify import verify_certificate
from .voting import at_least_power, floor_met, weighted_mode

Z_LAWS = {
    "half_lazy": certificate_z_dist,
    "scaled_half_lazy": scaled_certificate_z_dist,
}


def quadratic_certificate(
    A: CoeffMatrix,
    xi: DiscreteDist,
    beta,
    params: FitParams | None = None,
    subset_mode: str | None = None,
    seed: int = 0,
    count: int = SUBSET_SAMPLE,
    y_mode: str = EXACT,
    y_count: int = Y_SAMPLE,
    rho: Fraction | None = None,
    budget: int = DEFAULT_BUDGET,
    log: bool = False,
) -> tuple[StructureCertificate, PipelineTrace]:
    """Extract a structure certificate from a concentrated quadratic form.

    Every subset U masks A to a bilinear form, which runs through the bilinear
    pipeline with symmetrized arguments. The pair (pivot rows, k) is voted across
    subsets, then each row's coefficients are voted across the winning subsets.
    A pivot coefficient changes sign when the pivot and the row sit on opposite
    sides of U.
    """
    if not A.symmetric:
        raise NotSymmetric("The quadratic pipeline needs a symmetric matrix")
    params = params or FitParams(beta=beta)
    n = A.n
    zeta = symmetrize(xi)
    trace = PipelineTrace()

    # Hypothesis: rho >= n^-B for the quadratic form itself
    if rho is None:
        query = SmallBallQuery(
            beta=params.beta, form=QUADRATIC, coefficients=A, dist=xi
        )
        rho = sup_lower_bound(rho_exact(query, budget))
    trace.rho = Fraction(rho)
    if not at_least_power(trace.rho, n, -params.B):
        warnings.warn(f"rho = {trace.rho} is below n^-B", UserWarning, stacklevel=2)

    # One bilinear certificate per subset
    certificates = dict()
    for U in subsets(n, subset_mode, seed, count):
        try:
            cert, _ = bilinear_certificate(
                mask_matrix(A, U),
                zeta,
                params.beta,
                params=params,
                mode=y_mode,
                seed=child_seed(seed, int(U.bits, 0)),
                count=y_count,
                budget=budget,
            )
        except (NoGoodVectors, NoSpanningTuple, CoverageFloorMissed) as e:
            trace.subset_votes.append({"subset": U.bits, "error": type(e).__name__})
            continue
        certificates[U] = cert
        trace.subset_votes.append(
            {"subset": U.bits, "pivots": list(cert.pivot_rows), "k": cert.k}
        )
        if log:
            print(f"{U.bits}: pivots {list(cert.pivot_rows)}, k = {cert.k}")

    # Common (pivot rows, k)
    total = len(trace.subset_votes)
    if not certificates:
        raise InsufficientSubsetConsensus(f"None of {total} subsets gave a certificate")
    pivots, k = weighted_mode(
        ((c.pivot_rows, c.k), Fraction(1)) for c in certificates.values()
    )
    winners = {
        U: c for U, c in certificates.items() if (c.pivot_rows, c.k) == (pivots, k)
    }
    if len(winners) * Fraction(n) ** params.C < total:
        raise InsufficientSubsetConsensus(
            f"Only {len(winners)} of {total} subsets agree on pivots {list(pivots)}"
        )

    # Rows surviving on at least half of the winning subsets
    counts = Counter(i for c in winners.values() for i in c.surviving)
    surviving = tuple(i for i in range(n) if 2 * counts[i] >= len(winners))
    if not floor_met(len(surviving), n, params.epsilon):
        raise CoverageFloorMissed(
            f"{len(surviving)} surviving rows, below n - 2n^epsilon for n = {n}"
        )

    # Common coefficients per row, keyed by which side of U each index sits on
    row_coeffs = dict()
    for i in surviving:
        coeffs, sides, row_side = weighted_mode(
            (
                (
                    c.row_coeffs[i],
                    tuple(p in U.members for p in pivots),
                    i in U.members,
                ),
                Fraction(1),
            )
            for U, c in winners.items()
            if i in c.row_coeffs
        )
        row_coeffs[i] = tuple(
            -a if side != row_side else a for a, side in zip(coeffs, sides, strict=True)
        )

    certificate = StructureCertificate(
        k=k,
        pivot_rows=pivots,
        row_coeffs=row_coeffs,
        surviving=surviving,
        bound_exponent=max(c.bound_exponent for c in winners.values()),
    )
    trace.common_index_tuple = pivots
    trace.common_mass = Fraction(len(winners), total)
    trace.verification = _verification(A, certificate, xi, params.beta, budget)
    return certificate, trace


def subsets(n: int, mode: str | None, seed: int, count: int) -> list[SubsetMask]:
    """The subsets U to vote over.

    Exhaustive mode gives every subset, sampled mode `count` seeded draws (every
    subset when 2^n <= count). Without a mode, n <= 11 is exhaustive.
    """
    if mode is None:
        mode = EXHAUSTIVE if n <= EXHAUSTIVE_SUBSET_MAX_N else SAMPLED
    if mode not in (EXHAUSTIVE, SAMPLED):
        raise InvalidParameter(f"Unknown subset mode {mode!r}")
    if mode == EXHAUSTIVE:
        return all_masks(n)
    if count < 1:
        raise InvalidParameter(f"Need at least one sampled subset, got {count}")
    if 1 << n <= count:
        return all_masks(n)
    rng = np.random.default_rng(seed)
    values = sorted({int(v) for v in rng.integers(0, 1 << n, size=count)})
    return [SubsetMask.from_bits(v, n) for v in values]


def _verification(
    A: CoeffMatrix,
    cert: StructureCertificate,
    xi: DiscreteDist,
    beta: Fraction,
    budget: int,
) -> dict[str, dict]:
    """Exact row probabilities under both z laws, skipped when over budget."""
    floor = Fraction(1) / Fraction(A.n) ** cert.bound_exponent
    verification = dict()
    for name, z_law in Z_LAWS.items():
        try:
            probabilities = verify_certificate(A, cert, z_law(xi), beta, budget)
        except BudgetExceeded as e:
            verification[name] = {"skipped": str(e)}
            continue
        verification[name] = {
            "rows": {str(i): format_rational(p) for i, p in probabilities.items()},
            "floor": format_rational(floor),
            "passed": all(p >= floor for p in probabilities.values()),
        }
    return verification
