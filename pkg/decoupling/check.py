import warnings
from dataclasses import dataclass
from fractions import Fraction

import polars as pl

from common.budgets import DEFAULT_BUDGET
from mathutil.intervals import decoupling_denominator_bounds, log_bounds
from mathutil.rationals import (
    Vector,
    format_rational,
    norm_sq,
    parse_rational,
    sqrt_bracket,
)
from randvar.condition import ConditionParams, check_condition
from randvar.distribution import DiscreteDist, symmetrize
from smallball.exact import estimate_from_law, form_distribution
from smallball.forms import (
    BILINEAR,
    EXACT_BRACKET,
    QUADRATIC,
    CoeffMatrix,
    CoeffVector,
    SmallBallQuery,
)

from .mask import SubsetMask, all_masks, mask_matrix
from .parameters import C_LOG_EXPONENTS, DEFAULT_C_LOG, FLOOR_EXP, STRICT_FLOOR_EXP


@dataclass(frozen=True)
class DecouplingReport:
    """Both sides of the decoupling inequality for one subset U.

    `lhs_rho` is the quadratic small-ball probability and `rhs_prob` the probability
    that the masked bilinear form with symmetrized arguments has norm at most tau.
    The verdict compares rhs_prob with rho^8 / (2 (2 pi)^(7d/2) e^(4 pi)), using a
    certified lower bound of the denominator and the upper end of rho, so the floor
    is never under-estimated. `floor_8pi` uses e^(8 pi) instead.
    """

    subset: str
    lhs_rho: Fraction
    lhs_upper: Fraction
    rhs_prob: Fraction
    tau_sq: Fraction
    tau: Fraction
    constant_floor: Fraction
    floor_8pi: Fraction
    verdict: bool
    min_c_log: Fraction | None
    condition_prob: Fraction
    condition_satisfied: bool


def decoupling_check(
    A: CoeffMatrix,
    U: SubsetMask,
    beta,
    xi: DiscreteDist,
    b: CoeffVector | None = None,
    center: Vector | None = None,
    c_log=DEFAULT_C_LOG,
    budget: int = DEFAULT_BUDGET,
    condition: ConditionParams | None = None,
) -> DecouplingReport:
    """Check the decoupling inequality for one subset U by exact enumeration.

    Without a center the left side is the sup over centers (its upper bracket end
    feeds the floor when d >= 2).
    """
    beta = parse_rational(beta)
    c_log = parse_rational(c_log)
    condition_prob, satisfied = _condition(xi, condition)
    lhs = _lhs(A, beta, xi, b, center, budget)
    return _report(A, U, beta, xi, lhs, c_log, budget, condition_prob, satisfied)


def decoupling_sweep(
    A: CoeffMatrix,
    beta,
    xi: DiscreteDist,
    b: CoeffVector | None = None,
    center: Vector | None = None,
    c_log=DEFAULT_C_LOG,
    budget: int = DEFAULT_BUDGET,
    condition: ConditionParams | None = None,
) -> pl.DataFrame:
    """Decoupling reports for every subset U, one row per subset."""
    beta = parse_rational(beta)
    c_log = parse_rational(c_log)
    condition_prob, satisfied = _condition(xi, condition)
    lhs = _lhs(A, beta, xi, b, center, budget)
    rows = []
    for U in all_masks(A.n):
        report = _report(A, U, beta, xi, lhs, c_log, budget, condition_prob, satisfied)
        rows.append(
            {
                "subset": report.subset,
                "lhs_rho": format_rational(report.lhs_rho),
                "rhs_prob": format_rational(report.rhs_prob),
                "constant_floor": float(report.constant_floor),
                "verdict": report.verdict,
                "min_c_log": (
                    None
                    if report.min_c_log is None
                    else format_rational(report.min_c_log)
                ),
            }
        )
    return pl.DataFrame(
        rows,
        schema={
            "subset": pl.String,
            "lhs_rho": pl.String,
            "rhs_prob": pl.String,
            "constant_floor": pl.Float64,
            "verdict": pl.Boolean,
            "min_c_log": pl.String,
        },
    )


def _condition(xi: DiscreteDist, condition: ConditionParams | None):
    condition = condition or ConditionParams()
    probability, satisfied = check_condition(xi, condition)
    if not satisfied:
        warnings.warn(
            f"Distribution fails the anti-concentration condition: "
            f"P = {probability} < c3 = {condition.c3}",
            UserWarning,
            stacklevel=3,
        )
    return probability, satisfied


def _lhs(
    A: CoeffMatrix,
    beta: Fraction,
    xi: DiscreteDist,
    b: CoeffVector | None,
    center: Vector | None,
    budget: int,
) -> tuple[Fraction, Fraction]:
    """The quadratic small-ball probability and an upper bound for it."""
    query = SmallBallQuery(
        beta=beta, form=QUADRATIC, coefficients=A, dist=xi, b=b, center=center
    )
    estimate = estimate_from_law(form_distribution(query, budget), beta, query.center)
    if estimate.kind == EXACT_BRACKET:
        return estimate.lower, estimate.upper
    return estimate.value, estimate.value


def _report(
    A: CoeffMatrix,
    U: SubsetMask,
    beta: Fraction,
    xi: DiscreteDist,
    lhs: tuple[Fraction, Fraction],
    c_log: Fraction,
    budget: int,
    condition_prob: Fraction,
    condition_satisfied: bool,
) -> DecouplingReport:
    lhs_rho, lhs_upper = lhs
    zeta = symmetrize(xi)
    query = SmallBallQuery(
        beta=0,
        form=BILINEAR,
        coefficients=mask_matrix(A, U),
        dist=zeta,
        dist_y=zeta,
    )
    law = form_distribution(query, budget)

    # tau^2 = c_log^2 beta^2 log n, using the upper end of log n
    _, log_hi = log_bounds(A.n)
    base_sq = beta * beta * log_hi

    def rhs(c: Fraction) -> Fraction:
        tau_sq = c * c * base_sq
        return sum((m for v, m in law.items() if norm_sq(v) <= tau_sq), Fraction(0))

    floor = _floor(lhs_upper, A.dim, FLOOR_EXP)
    rhs_prob = rhs(c_log)
    min_c_log = next(
        (
            Fraction(2) ** e
            for e in C_LOG_EXPONENTS
            if rhs(Fraction(2) ** e) >= floor
        ),
        None,
    )
    tau_sq = c_log * c_log * base_sq
    return DecouplingReport(
        subset=U.bits,
        lhs_rho=lhs_rho,
        lhs_upper=lhs_upper,
        rhs_prob=rhs_prob,
        tau_sq=tau_sq,
        tau=sqrt_bracket(tau_sq)[1],
        constant_floor=floor,
        floor_8pi=_floor(lhs_upper, A.dim, STRICT_FLOOR_EXP),
        verdict=rhs_prob >= floor,
        min_c_log=min_c_log,
        condition_prob=condition_prob,
        condition_satisfied=condition_satisfied,
    )


def _floor(rho: Fraction, dim: int, exp_coefficient: int) -> Fraction:
    """rho^8 / (2 D) with D replaced by a certified lower bound."""
    denominator, _ = decoupling_denominator_bounds(dim, exp_coefficient)
    return rho**8 / (2 * denominator)
