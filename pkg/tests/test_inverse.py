from fractions import Fraction

import pytest

from common.errors import InvalidParameter, SearchSpaceExceeded
from constructions.builders import build_linear_gap_instance
from gap.core import symmetric_gap
from inverse.bilinear import bilinear_certificate, classify_good, project
from inverse.fit import candidate_steps, count_candidates, fit_gap_linear
from inverse.quadratic import quadratic_certificate, subsets
from inverse.structures import FitParams, StructureCertificate
from inverse.verify import combined_row, residual_fit, verify_certificate
from inverse.voting import at_least_power, floor_met, weighted_mode
from randvar.distribution import bernoulli_lazy, certificate_z_dist
from smallball.forms import coeff_matrix

POINTS = ["0.1", "1.05", "2.02", "2.98"]


def zero_matrix(n):
    return coeff_matrix([[0] * n for _ in range(n)])


def test_fit_gap_linear():
    fit = fit_gap_linear(POINTS, FitParams(beta="0.1"))
    assert fit.gap.generators == ((Fraction(1),),)
    assert fit.gap.dimensions == (3,)
    assert fit.covered == (0, 1, 2, 3)
    assert [fit.assignments[i].coords for i in fit.covered] == [(0,), (1,), (2,), (3,)]


def test_fit_gap_linear_scales_and_permutes():
    # Scaling points and beta together scales the generators only
    doubled = [2 * Fraction(p) for p in POINTS]
    fit = fit_gap_linear(doubled, FitParams(beta="0.2"))
    assert fit.gap.generators == ((Fraction(2),),)
    assert [fit.assignments[i].coords for i in fit.covered] == [(0,), (1,), (2,), (3,)]

    permuted = fit_gap_linear(POINTS[::-1], FitParams(beta="0.1"))
    assert permuted.gap == fit_gap_linear(POINTS, FitParams(beta="0.1")).gap
    assert [permuted.assignments[i].coords for i in permuted.covered] == [
        (3,),
        (2,),
        (1,),
        (0,),
    ]


def test_fit_gap_linear_edge_cases():
    fit = fit_gap_linear([0, 0, 0], FitParams(beta="1/10"))
    assert fit.gap.rank == 0
    assert fit.covered == (0, 1, 2)

    # beta = 0 leaves only the zero GAP, which covers nothing here
    assert fit_gap_linear([1, 2], FitParams(beta=0)) is None

    with pytest.raises(InvalidParameter):
        fit_gap_linear([], FitParams(beta=1))
    with pytest.raises(InvalidParameter):
        fit_gap_linear([1, 2], FitParams(beta=1, n_prime=2))
    with pytest.raises(SearchSpaceExceeded):
        fit_gap_linear(POINTS, FitParams(beta="0.1", search_ceiling=10))


def test_fit_recovers_planted_points():
    instance = build_linear_gap_instance(6, symmetric_gap([(1,)], [1]), 0, seed=2)
    fit = fit_gap_linear(instance.coefficients.entries, FitParams(beta="1/2"))
    assert fit.covered == tuple(range(6))
    assert fit.gap.rank <= 1


def test_candidate_search_space():
    params = FitParams(beta=1, p_max=1, m_max=2, k_max=2, r_max=2)
    steps = candidate_steps(Fraction(1), 1, params)
    assert steps == [(Fraction(1),), (Fraction(2),)]
    assert count_candidates(len(steps), params) == 1 + 2 * 2 + 1 * 4
    assert candidate_steps(Fraction(0), 1, params) == []


def test_fit_params():
    params = FitParams.from_dict({"beta": "1/2", "r_max": 1})
    assert params.beta == Fraction(1, 2)
    assert params.r_max == 1
    assert params.epsilon == Fraction(1, 2)
    with pytest.raises(InvalidParameter):
        FitParams.from_dict({"beta": 1, "gamma": 2})
    with pytest.raises(InvalidParameter):
        FitParams(beta=-1)


def test_voting():
    assert weighted_mode([("b", Fraction(1)), ("a", Fraction(1))]) == "a"
    assert weighted_mode([("b", Fraction(1)), ("a", 1), ("b", 1)]) == "b"

    test_cases = [
        {"x": Fraction(1, 4), "n": 2, "exponent": Fraction(-2), "expected": True},
        {"x": Fraction(1, 5), "n": 2, "exponent": Fraction(-2), "expected": False},
        {"x": Fraction(1, 2), "n": 4, "exponent": Fraction(-1, 2), "expected": True},
        {"x": Fraction(0), "n": 4, "exponent": Fraction(-1), "expected": False},
    ]
    for test_case in test_cases:
        assert (
            at_least_power(test_case["x"], test_case["n"], test_case["exponent"])
            == test_case["expected"]
        )

    assert floor_met(4, 4, Fraction(1, 2))
    assert floor_met(0, 4, Fraction(1, 2))
    assert not floor_met(0, 9, Fraction(1, 2))


def test_project_and_classify_good():
    A = coeff_matrix([[1, 2], [2, 0]])
    assert project(A, (Fraction(1), Fraction(-1))) == ((Fraction(-1),), (Fraction(2),))
    assert classify_good(coeff_matrix([[1]]), [1], Fraction(1, 2), 0, bernoulli_lazy())
    # x_0 + 2 x_1 + 4 x_2 takes eight values
    diagonal = coeff_matrix([[1, 0, 0], [0, 2, 0], [0, 0, 4]])
    assert not classify_good(diagonal, [1, 1, 1], Fraction(1), 0, bernoulli_lazy())


def test_bilinear_certificate_of_zero_matrix():
    cert, trace = bilinear_certificate(zero_matrix(3), bernoulli_lazy(), "1/2")
    assert cert.k == 1
    assert cert.pivot_rows == ()
    assert cert.surviving == (0, 1, 2)
    assert cert.row_coeffs == {0: (), 1: (), 2: ()}
    assert trace.rho == 1
    assert trace.good_mass == 1
    assert trace.common_mass == 1
    assert trace.tight_exponent == 0
    assert all(record["verified"] for record in trace.identities.values())


def test_bilinear_certificate_sampled_is_deterministic():
    A = coeff_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    first = bilinear_certificate(A, bernoulli_lazy(), 1, mode="sampled", seed=4)
    second = bilinear_certificate(A, bernoulli_lazy(), 1, mode="sampled", seed=4)
    assert first == second
    with pytest.raises(InvalidParameter):
        bilinear_certificate(A, bernoulli_lazy(), 1, mode="sampled", count=0)


def test_quadratic_certificate_of_zero_matrix():
    cert, trace = quadratic_certificate(zero_matrix(3), bernoulli_lazy(), "1/2")
    assert cert.k == 1
    assert cert.pivot_rows == ()
    assert cert.surviving == (0, 1, 2)
    assert trace.common_mass == 1
    assert len(trace.subset_votes) == 8
    assert trace.verification["half_lazy"]["passed"]
    assert trace.verification["scaled_half_lazy"]["passed"]


def test_quadratic_certificate_of_rank_one_matrix():
    # q_ij = 2 k_i k_j: every combined row is a multiple of k
    k = [1, 1, -1, -1]
    A = coeff_matrix([[2 * a * b for b in k] for a in k])
    cert, trace = quadratic_certificate(A, bernoulli_lazy(), "1/2")
    assert len(cert.pivot_rows) <= 2
    probabilities = verify_certificate(
        A, cert, certificate_z_dist(bernoulli_lazy()), "1/2"
    )
    assert set(probabilities) == set(cert.surviving)
    assert all(p >= Fraction(81, 256) for p in probabilities.values())


def test_subsets():
    assert len(subsets(3, "exhaustive", 0, 5)) == 8
    # Without a mode, small n is exhaustive
    assert len(subsets(3, None, 0, 2)) == 8
    assert subsets(14, None, 9, 20) == subsets(14, "sampled", 9, 20)

    # Sampled mode samples at any n, unless the count covers every subset
    small = subsets(6, "sampled", 0, 16)
    assert 1 <= len(small) <= 16
    assert small == subsets(6, "sampled", 0, 16)
    assert len(subsets(3, "sampled", 0, 8)) == 8

    sampled = subsets(14, "sampled", 9, 20)
    assert sampled == subsets(14, "sampled", 9, 20)
    assert 1 <= len(sampled) <= 20
    assert [U.bits for U in sampled] == sorted(U.bits for U in sampled)

    with pytest.raises(InvalidParameter):
        subsets(3, "some", 0, 1)
    with pytest.raises(InvalidParameter):
        subsets(14, "sampled", 0, 0)


def test_verify_and_residual_fit():
    A = coeff_matrix([[1, 2, 0], [2, 4, 0], [0, 0, 0]])
    # 2 row_0 - row_1 = 0, row_2 is already zero
    cert = StructureCertificate(
        k=2,
        pivot_rows=(1,),
        row_coeffs={0: (-1,), 2: (0,)},
        surviving=(0, 2),
        bound_exponent=0,
    )
    assert combined_row(A, cert, 0) == [(Fraction(0),)] * 3
    z = certificate_z_dist(bernoulli_lazy())
    assert verify_certificate(A, cert, z, 0) == {0: Fraction(1), 2: Fraction(1)}

    fits = residual_fit(A, cert, FitParams(beta="1/2"))
    assert set(fits) == {0, 2}
    assert all(fit.gap.rank == 0 for fit in fits.values())

    # A single row of the matrix is far from small
    cert = StructureCertificate(
        k=1, pivot_rows=(), row_coeffs={1: ()}, surviving=(1,), bound_exponent=0
    )
    # 2 z_0 + 4 z_1 = 0 forces z_0 = z_1 = 0
    assert verify_certificate(A, cert, z, 0) == {1: Fraction(9, 16)}


def test_bilinear_certificate_of_planted_rank_one_form():
    # a_ij = k_i c_j: every row is a multiple of row 0
    k, c = (1, -1, 1, -1), (1, 1, -1, 1)
    A = coeff_matrix([[ki * cj for cj in c] for ki in k], symmetric=False)
    cert, trace = bilinear_certificate(A, bernoulli_lazy(), "1/2")
    assert len(cert.pivot_rows) == 1
    assert cert.surviving == (0, 1, 2, 3)
    assert trace.good_mass == 1
    probabilities = verify_certificate(
        A, cert, certificate_z_dist(bernoulli_lazy()), "1/2"
    )
    assert all(p == 1 for p in probabilities.values())


def test_default_step_grid_scales_with_dimension():
    params = FitParams(beta="1/2")
    assert [params.step_bound(d) for d in [1, 2, 3, 4]] == [12, 6, 2, 1]
    assert FitParams(beta="1/2", m_max=3).step_bound(2) == 3
    for dim in [1, 2, 3, 4]:
        steps = candidate_steps(Fraction(1, 2), dim, params)
        assert count_candidates(len(steps), params) <= params.search_ceiling

    fit = fit_gap_linear([(1, 1), (2, 2), (-1, -1)], params)
    assert fit.gap.rank == 1
    assert fit.covered == (0, 1, 2)

    # Dimension 5 needs a smaller grid or a larger ceiling
    with pytest.raises(SearchSpaceExceeded):
        fit_gap_linear([(1, 0, 0, 0, 0)], params)
    assert fit_gap_linear([(1, 0, 0, 0, 0)], FitParams(beta="1/2", p_max=1))


def test_verification_radius_grows_with_the_exponent():
    A = coeff_matrix([[1, 2, 0], [2, 4, 0], [0, 0, 0]])
    z = certificate_z_dist(bernoulli_lazy())
    # Row 1 alone is not annihilated: 2 z_0 + 4 z_1 is zero only when both are
    loose = StructureCertificate(
        k=1, pivot_rows=(), row_coeffs={1: ()}, surviving=(1,), bound_exponent=3
    )
    tight = StructureCertificate(
        k=1, pivot_rows=(), row_coeffs={1: ()}, surviving=(1,), bound_exponent=0
    )
    # |2 z_0 + 4 z_1| <= 12 lies inside the radius 27 / 2
    assert verify_certificate(A, loose, z, "1/2") == {1: Fraction(1)}
    assert verify_certificate(A, tight, z, "1/2") == {1: Fraction(9, 16)}
    assert Fraction(9, 16) < Fraction(1, 3**tight.bound_exponent)
