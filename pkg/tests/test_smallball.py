import math
from fractions import Fraction

import polars as pl
import pytest
from polars.testing import assert_frame_equal

from common.errors import (
    BudgetExceeded,
    EmptyCenterGrid,
    InvalidParameter,
    SizeMismatch,
)
from randvar.distribution import bernoulli_lazy
from smallball.exact import (
    bracket_ball_mass,
    estimate_from_law,
    form_distribution,
    linear_law,
    rho_bilinear_exact,
    rho_exact,
    sup_ball_mass,
    sup_lower_bound,
)
from smallball.forms import (
    BILINEAR,
    EXACT,
    EXACT_BRACKET,
    LINEAR,
    MONTE_CARLO,
    QUADRATIC,
    SmallBallQuery,
    coeff_matrix,
    coeff_vector,
)
from smallball.montecarlo import rho_monte_carlo
from smallball.profile import erdos_profile


def F(a, b=1):
    return Fraction(a, b)


def linear_query(values, beta="1/2", **kwargs):
    return SmallBallQuery(
        beta=beta,
        form=LINEAR,
        coefficients=coeff_vector(values),
        dist=bernoulli_lazy(),
        **kwargs,
    )


def test_rho_linear_exact():
    # Central binomial coefficient over 2^10
    estimate = rho_exact(linear_query([1] * 10))
    assert estimate.kind == EXACT
    assert estimate.value == F(252, 1024)

    test_cases = [
        {"values": [1, 1], "beta": 0, "center": None, "rho": F(1, 2)},
        {"values": [1, 1], "beta": 0, "center": (2,), "rho": F(1, 4)},
        {"values": [1, 2], "beta": 0, "center": None, "rho": F(1, 4)},
        {"values": [1, 2], "beta": 1, "center": None, "rho": F(1, 2)},
        {"values": [0, 0, 0], "beta": 0, "center": None, "rho": F(1)},
    ]
    for test_case in test_cases:
        query = linear_query(
            test_case["values"], test_case["beta"], center=test_case["center"]
        )
        assert rho_exact(query).value == test_case["rho"]


def test_meet_in_the_middle_matches_direct_enumeration():
    query = linear_query([1] * 21)
    direct = rho_exact(query)
    split = rho_exact(query, budget=4096)
    assert direct.value == split.value == F(352716, 2**21)

    with pytest.raises(BudgetExceeded):
        rho_exact(query, budget=100)


def test_rho_bilinear_exact():
    # (x1 + x2)(y1 + y2) vanishes unless both sums do not
    query = SmallBallQuery(
        beta=0,
        form=BILINEAR,
        coefficients=coeff_matrix([[1, 1], [1, 1]]),
        dist=bernoulli_lazy(),
    )
    assert rho_bilinear_exact(query).value == F(3, 4)

    with pytest.raises(InvalidParameter):
        rho_bilinear_exact(linear_query([1, 1]))

    with pytest.raises(BudgetExceeded):
        rho_exact(query, budget=15)


def test_rho_quadratic_exact():
    test_cases = [
        {"A": [[1, 1], [1, 1]], "b": None, "rho": F(1, 2)},
        {"A": [[0]], "b": [1], "rho": F(1, 2)},
        {"A": [[1]], "b": [1], "rho": F(1, 2)},
        {"A": [[1]], "b": None, "rho": F(1)},
    ]
    for test_case in test_cases:
        b = test_case["b"]
        query = SmallBallQuery(
            beta=0,
            form=QUADRATIC,
            coefficients=coeff_matrix(test_case["A"]),
            dist=bernoulli_lazy(),
            b=None if b is None else coeff_vector(b),
        )
        assert rho_exact(query).value == test_case["rho"]


def test_query_validation():
    with pytest.raises(InvalidParameter):
        linear_query([1], beta=-1)
    with pytest.raises(InvalidParameter):
        linear_query([1], b=coeff_vector([1]))
    with pytest.raises(SizeMismatch):
        linear_query([1], center=(0, 0))
    with pytest.raises(SizeMismatch):
        SmallBallQuery(
            beta=0,
            form=QUADRATIC,
            coefficients=coeff_vector([1]),
            dist=bernoulli_lazy(),
        )


def test_sup_ball_mass():
    law = {(F(0),): F(1, 2), (F(1),): F(1, 4), (F(3),): F(1, 4)}
    assert sup_ball_mass(law, F(0)) == F(1, 2)
    assert sup_ball_mass(law, F(1, 2)) == F(3, 4)
    assert sup_ball_mass(law, F(3, 2)) == F(1)


def test_bracket_in_two_dimensions():
    law = {(F(0), F(0)): F(1, 2), (F(1), F(0)): F(1, 2)}
    assert bracket_ball_mass(law, F(1, 2)) == (F(1, 2), F(1))

    estimate = estimate_from_law(law, F(1, 2))
    assert estimate.kind == EXACT_BRACKET
    assert (estimate.lower, estimate.upper) == (F(1, 2), F(1))
    assert sup_lower_bound(estimate) == F(1, 2)

    # A fixed center is always exact
    assert estimate_from_law(law, F(1, 2), (F(1, 2), F(0))).value == F(1)

    law = linear_law(coeff_vector([(1, 0), (0, 1)]).entries, bernoulli_lazy())
    assert len(law) == 4
    assert bracket_ball_mass(law, F(1)) == (F(1, 4), F(3, 4))


def test_rho_monte_carlo_is_deterministic():
    query = linear_query([1, 1], beta=0, center=(0,))
    first = rho_monte_carlo(query, 4000, seed=7)
    second = rho_monte_carlo(query, 4000, seed=7)
    assert first == second
    assert first.kind == MONTE_CARLO
    assert abs(first.value - 0.5) < 0.1
    assert first.ci_low <= first.value <= first.ci_high

    # Sup mode takes the best center of the grid
    sup = rho_monte_carlo(linear_query([1, 1], beta=0), 4000, 7, [(5,), (0,)])
    assert abs(sup.value - 0.5) < 0.1

    with pytest.raises(EmptyCenterGrid):
        rho_monte_carlo(linear_query([1, 1]), 100, 0)
    with pytest.raises(InvalidParameter):
        rho_monte_carlo(query, 0, 0)


def test_erdos_profile():
    frame = erdos_profile([1, 2, 10])
    expected = pl.DataFrame(
        {
            "n": [1, 2, 10],
            "rho": ["1/2", "1/2", "63/256"],
            "scaled": [0.5, 0.5 * math.sqrt(2), 252 / 1024 * math.sqrt(10)],
        },
        schema={"n": pl.Int64, "rho": pl.String, "scaled": pl.Float64},
    )
    assert_frame_equal(frame, expected)


def test_rho_monte_carlo_of_zero_form():
    estimate = rho_monte_carlo(linear_query([0, 0], beta=0, center=(0,)), 100, 1)
    assert estimate.value == 1.0
    assert estimate.ci_low == estimate.ci_high == 1.0


def test_rho_is_monotone_in_beta():
    values = [1, 2, 3, 5]
    rhos = [rho_exact(linear_query(values, beta=b)).value for b in [0, "1/2", 1, 2, 3]]
    assert all(a <= b for a, b in zip(rhos, rhos[1:], strict=False))
    assert rhos[0] < rhos[-1]


def test_rho_is_invariant_under_joint_scaling():
    test_cases = [
        {"values": [1, 2, 3], "beta": "1/2", "c": 3},
        {"values": [1, "1/2", "-2/3", 4], "beta": "1/3", "c": "5/7"},
    ]
    for test_case in test_cases:
        c = Fraction(test_case["c"])
        beta = Fraction(test_case["beta"])
        scaled = [c * Fraction(v) for v in test_case["values"]]
        assert (
            rho_exact(linear_query(scaled, beta=c * beta)).value
            == rho_exact(linear_query(test_case["values"], beta=beta)).value
        )

    A = coeff_matrix([[1, 2], [2, -1]])
    tripled = coeff_matrix([[3, 6], [6, -3]])
    for form in [BILINEAR, QUADRATIC]:
        plain = SmallBallQuery(
            beta="1/2", form=form, coefficients=A, dist=bernoulli_lazy("1/2")
        )
        scaled = SmallBallQuery(
            beta="3/2", form=form, coefficients=tripled, dist=bernoulli_lazy("1/2")
        )
        assert rho_exact(plain).value == rho_exact(scaled).value


def test_monte_carlo_interval_covers_exact_value():
    # x1 + x2 - x3 - x4 = 0 with probability 6/16
    query = linear_query([1, 1, -1, -1], beta=0, center=(0,))
    assert rho_exact(query).value == F(3, 8)
    covered = 0
    for seed in range(100):
        estimate = rho_monte_carlo(query, 2000, seed)
        covered += estimate.ci_low <= 0.375 <= estimate.ci_high
    assert covered >= 90


def test_pooled_work_does_not_depend_on_threads(monkeypatch):
    signs = [[1, -1, 1, 1, -1], [-1, 1, 1, -1, 1], [1, 1, -1, 1, 1]]
    signs += [[-1, 1, -1, -1, 1], [1, -1, 1, 1, 1]]
    # 3^5 * 3^5 outcomes, above the worker-pool threshold
    bilinear = SmallBallQuery(
        beta="1/2",
        form=BILINEAR,
        coefficients=coeff_matrix(signs, symmetric=False),
        dist=bernoulli_lazy("1/2"),
    )
    sampled = linear_query([1] * 10, beta=0, center=(0,))

    results = []
    for threads in ["1", "4"]:
        monkeypatch.setenv("LO_THREADS", threads)
        results.append(
            (form_distribution(bilinear), rho_monte_carlo(sampled, 1 << 15, seed=3))
        )
    assert results[0] == results[1]
    assert sum(results[0][0].values()) == 1
