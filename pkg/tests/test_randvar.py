from fractions import Fraction

import pytest

from common.errors import InvalidDistribution, InvalidParameter
from randvar.condition import ConditionParams, check_condition
from randvar.distribution import (
    DiscreteDist,
    bernoulli_lazy,
    certificate_z_dist,
    convolve,
    from_masses,
    lazy_product,
    point_mass,
    product,
    scale,
    scaled_certificate_z_dist,
    symmetrize,
)


def F(a, b=1):
    return Fraction(a, b)


def test_discrete_dist_validation():
    with pytest.raises(InvalidDistribution):
        DiscreteDist(atoms=())
    with pytest.raises(InvalidDistribution):
        DiscreteDist(atoms=((F(1), F(1, 2)), (F(0), F(1, 2))))
    with pytest.raises(InvalidDistribution):
        DiscreteDist(atoms=((F(0), F(1, 2)), (F(1), F(1, 4))))
    with pytest.raises(InvalidDistribution):
        from_masses({0: "1/2", 1: "-1/2", 2: 1})


def test_from_masses_merges_values():
    xi = from_masses([(1, "1/4"), ("1", "1/4"), (0, "1/2")])
    assert xi.atoms == ((F(0), F(1, 2)), (F(1), F(1, 2)))
    assert xi.mass(1) == F(1, 2)
    assert xi.mass(5) == 0
    assert point_mass(3).atoms == ((F(3), F(1)),)


def test_bernoulli_lazy():
    xi = bernoulli_lazy()
    assert xi.atoms == ((F(-1), F(1, 2)), (F(1), F(1, 2)))
    assert xi.is_symmetric()

    lazy = bernoulli_lazy("1/2")
    assert lazy.masses == (F(1, 4), F(1, 2), F(1, 4))

    for mu in [0, "3/2", -1]:
        with pytest.raises(InvalidParameter):
            bernoulli_lazy(mu)


def test_operations():
    xi = bernoulli_lazy()
    # Sum of two signs
    assert convolve(xi, xi).atoms == (
        (F(-2), F(1, 4)),
        (F(0), F(1, 2)),
        (F(2), F(1, 4)),
    )
    assert product(xi, xi).atoms == ((F(-1), F(1, 2)), (F(1), F(1, 2)))
    assert scale(xi, 3).values == (F(-3), F(3))
    assert symmetrize(from_masses({0: "1/2", 1: "1/2"})).atoms == (
        (F(-1), F(1, 4)),
        (F(0), F(1, 2)),
        (F(1), F(1, 4)),
    )
    assert not from_masses({0: "1/2", 1: "1/2"}).is_symmetric()


def test_certificate_z_dist():
    z = certificate_z_dist(bernoulli_lazy())
    assert z.atoms == ((F(-2), F(1, 8)), (F(0), F(3, 4)), (F(2), F(1, 8)))
    assert scaled_certificate_z_dist(bernoulli_lazy()).values == (F(-4), F(0), F(4))


def test_check_condition():
    test_cases = [
        {"xi": bernoulli_lazy(), "probability": F(1, 2), "holds": True},
        {"xi": bernoulli_lazy("1/2"), "probability": F(5, 8), "holds": True},
        {"xi": point_mass(0), "probability": F(0), "holds": False},
        {
            "xi": from_masses({0: "1/2", 3: "1/2"}),
            "probability": F(0),
            "holds": False,
        },
    ]
    for test_case in test_cases:
        probability, holds = check_condition(test_case["xi"])
        assert probability == test_case["probability"]
        assert holds == test_case["holds"]

    # Looser constants accept the gap of 3
    probability, holds = check_condition(
        from_masses({0: "1/2", 3: "1/2"}), ConditionParams(c1=1, c2=3, c3="1/2")
    )
    assert probability == F(1, 2)
    assert holds


def test_condition_params_validation():
    for kwargs in [{"c1": 2, "c2": 1}, {"c1": 0}, {"c3": 0}, {"c3": "3/2"}]:
        with pytest.raises(InvalidParameter):
            ConditionParams(**kwargs)


def test_lazy_product_mass_at_zero():
    zeta = symmetrize(bernoulli_lazy())
    for mu in [F(1, 2), F(1, 3), F(1)]:
        law = lazy_product(zeta, mu)
        assert law.mass(0) == (1 - mu) + mu * zeta.mass(0)
        assert law.is_symmetric()
