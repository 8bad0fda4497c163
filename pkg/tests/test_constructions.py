from fractions import Fraction

import numpy as np
import pytest

from common.errors import (
    InfeasibleK,
    InvalidParameter,
    NotProper,
    SizeMismatch,
    VolumeExceedsCap,
)
from constructions.builders import (
    build_linear_gap_instance,
    build_mixed_instance,
    build_quadratic_gap_instance,
    build_rank_one_instance,
    certify_instance,
)
from constructions.parameters import LINEAR_GAP, MIXED, QUADRATIC_GAP, RANK_ONE
from constructions.perturb import lattice_perturbation
from gap.core import symmetric_gap
from mathutil.rationals import dist_sq, parse_rational
from smallball.forms import coeff_vector

LINE = symmetric_gap([(1,)], [1])


def test_linear_gap_instance():
    instance = build_linear_gap_instance(6, LINE, 0, seed=3)
    assert instance.kind == LINEAR_GAP
    assert instance.claimed_rho_lower == Fraction(1, 13)
    assert instance.claimed_beta == 0
    assert all(a[0] in (-1, 0, 1) for a in instance.coefficients.entries)

    check = certify_instance(instance)
    assert check.satisfied
    assert check.witness_rho >= Fraction(1, 13)

    # Same seed, same instance
    assert build_linear_gap_instance(6, LINE, 0, seed=3) == instance


def test_perturbed_instance_stays_close():
    delta = Fraction(1, 10)
    instance = build_linear_gap_instance(5, LINE, delta, seed=1)
    assert instance.claimed_beta == 5 * delta
    for a, q in zip(instance.coefficients.entries, instance.hidden["q"], strict=True):
        q = tuple(parse_rational(c) for c in q)
        assert dist_sq(a, q) <= delta * delta
    assert certify_instance(instance).satisfied


def test_quadratic_and_mixed_instances():
    instance = build_quadratic_gap_instance(3, LINE, 0, seed=0)
    assert instance.kind == QUADRATIC_GAP
    assert instance.claimed_rho_lower == Fraction(1, 19)
    assert instance.coefficients.symmetric
    assert certify_instance(instance).satisfied

    K = [[1, -1, 1, -1]]
    B = [[(1,), (0,), (2,), (1,)]]
    mixed = build_mixed_instance(4, LINE, 1, K, B, 0, seed=5)
    assert mixed.kind == MIXED
    # P(x1 - x2 + x3 - x4 = 0) = 3/8 over Vol(16Q) = 33
    assert mixed.claimed_rho_lower == Fraction(3, 8) / 33
    assert mixed.hidden["k"] == [[1, -1, 1, -1]]
    assert certify_instance(mixed).satisfied


def test_rank_one_instance():
    b = coeff_vector([1, 2, 0, -1])
    instance = build_rank_one_instance(4, [1, 1, 1, 1], b, 0, seed=0)
    assert instance.kind == RANK_ONE
    assert instance.claimed_rho_lower == Fraction(3, 8)
    # q_ij = k_i b_j + k_j b_i
    assert instance.coefficients.entries[0][1] == (Fraction(3),)
    assert instance.coefficients.entries[2][2] == (Fraction(0),)
    check = certify_instance(instance)
    assert check.satisfied
    assert check.witness_rho >= Fraction(3, 8)


def test_builders_reject_bad_input():
    b = coeff_vector([1, 1, 1])
    with pytest.raises(InfeasibleK):
        build_rank_one_instance(3, [1, 1, 1], b, 0, seed=0)
    with pytest.raises(SizeMismatch):
        build_rank_one_instance(3, [1, 1], b, 0, seed=0)
    with pytest.raises(InvalidParameter):
        build_rank_one_instance(3, [1, 1, 2], b, -1, seed=0)
    with pytest.raises(NotProper):
        build_linear_gap_instance(3, symmetric_gap([(1,), (2,)], [1, 1]), 0, 0)
    with pytest.raises(VolumeExceedsCap):
        build_quadratic_gap_instance(4, LINE, 0, 0, cap=10)
    with pytest.raises(InvalidParameter):
        build_linear_gap_instance(0, LINE, 0, 0)


def test_lattice_perturbation():
    delta = Fraction(1, 3)
    first = lattice_perturbation(np.random.default_rng(11), 3, delta)
    second = lattice_perturbation(np.random.default_rng(11), 3, delta)
    assert first == second
    assert sum(c * c for c in first) <= delta * delta
    assert lattice_perturbation(np.random.default_rng(0), 2, Fraction(0)) == (0, 0)
