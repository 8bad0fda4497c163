import math
from fractions import Fraction

import pytest

from common.errors import ConfigInvalid, InvalidParameter
from mathutil.intervals import decoupling_denominator_bounds, log_bounds
from mathutil.linalg import integer_det, nullspace, rank
from mathutil.parallel import parallel_map, thread_count
from mathutil.rationals import (
    combine,
    exact_sqrt,
    format_rational,
    parse_rational,
    primitive_integer_vector,
    sqrt_bracket,
)
from mathutil.seeds import child_seed, spawn_streams, split_samples


def test_parse_rational():
    assert parse_rational("1/2") == Fraction(1, 2)
    assert parse_rational(" -3/6 ") == Fraction(-1, 2)
    assert parse_rational("0.1") == Fraction(1, 10)
    assert parse_rational(0.1) == Fraction(1, 10)
    assert parse_rational(7) == Fraction(7)
    for bad in ["x", "1/0", True, None]:
        with pytest.raises(InvalidParameter):
            parse_rational(bad)


def test_format_rational():
    assert format_rational(Fraction(252, 1024)) == "63/256"
    assert format_rational(3) == "3/1"
    assert format_rational(Fraction(-1, 2)) == "-1/2"


def test_combine():
    vectors = [(Fraction(1), Fraction(0)), (Fraction(1, 2), Fraction(3))]
    assert combine([2, -2], vectors, 2) == (Fraction(1), Fraction(-6))
    assert combine([0, 0], vectors, 2) == (Fraction(0), Fraction(0))


def test_square_roots():
    assert exact_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert exact_sqrt(Fraction(2)) is None
    assert exact_sqrt(Fraction(-1)) is None

    lo, hi = sqrt_bracket(Fraction(2))
    assert lo * lo <= 2 <= hi * hi
    assert hi - lo <= Fraction(1, 2**64)
    assert sqrt_bracket(Fraction(16)) == (Fraction(4), Fraction(4))


def test_primitive_integer_vector():
    assert primitive_integer_vector([Fraction(1, 2), Fraction(-1, 3)]) == (3, -2)
    assert primitive_integer_vector([-4, 6, 0]) == (2, -3, 0)
    assert primitive_integer_vector([0, 0]) == (0, 0)


def test_rank_and_nullspace():
    assert rank([[1, 2], [2, 4]], 2) == 1
    assert rank([[1, 0], [0, 1]], 2) == 2
    assert rank([], 3) == 0

    basis = nullspace([[1, 2]], 2)
    assert len(basis) == 1
    x = basis[0]
    assert x[0] + 2 * x[1] == 0
    assert any(a != 0 for a in x)

    assert nullspace([], 2) == [
        (Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1)),
    ]


def test_integer_det():
    assert integer_det([]) == 1
    assert integer_det([[3]]) == 3
    assert integer_det([[1, 2], [3, 4]]) == -2
    assert integer_det([[2, 0, 0], [0, 3, 0], [0, 0, -1]]) == -6


def test_interval_bounds():
    lo, hi = log_bounds(10)
    assert lo <= Fraction(math.log(10)) + Fraction(1, 10**9)
    assert lo <= hi
    assert hi - lo < Fraction(1, 10**20)
    assert log_bounds(1) == (Fraction(0), Fraction(0))

    # (2 pi)^(7/2) e^(4 pi) is about 1.78e8
    lo, hi = decoupling_denominator_bounds(1)
    assert 17 * 10**7 < lo <= hi < 18 * 10**7
    strict_lo, _ = decoupling_denominator_bounds(1, exp_coefficient=8)
    assert strict_lo > hi


def test_thread_count(monkeypatch):
    monkeypatch.setenv("LO_THREADS", "3")
    assert thread_count() == 3

    monkeypatch.setenv("LO_THREADS", "zero")
    with pytest.raises(ConfigInvalid):
        thread_count()

    monkeypatch.setenv("LO_THREADS", "0")
    with pytest.raises(ConfigInvalid):
        thread_count()


def test_parallel_map_keeps_order(monkeypatch):
    monkeypatch.setenv("LO_THREADS", "1")
    assert parallel_map(abs, [-3, 2, -1], work=10**9) == [3, 2, 1]


def test_seeds():
    assert split_samples(10, 4) == [3, 3, 2, 2]
    assert sum(split_samples(7, 16)) == 7

    first = [rng.integers(0, 1000) for rng in spawn_streams(5, 3)]
    second = [rng.integers(0, 1000) for rng in spawn_streams(5, 3)]
    assert first == second

    assert child_seed(1, 2, 3) == child_seed(1, 2, 3)
    assert child_seed(1, 2, 3) != child_seed(1, 2, 4)
    assert 0 <= child_seed(9, 0) < 2**63
