from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction

from common.errors import InvalidDistribution, InvalidParameter
from mathutil.rationals import parse_rational


@dataclass(frozen=True)
class DiscreteDist:
    """A finite-support random variable with exact rational masses.

    Atoms are (value, mass) pairs with strictly increasing values and positive masses
    summing to exactly 1.
    """

    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if not self.atoms:
            raise InvalidDistribution("A distribution needs at least one atom")
        values = [v for v, _ in self.atoms]
        if any(a >= b for a, b in zip(values, values[1:], strict=False)):
            raise InvalidDistribution("Atom values must be strictly increasing")
        if any(m <= 0 for _, m in self.atoms):
            raise InvalidDistribution("Atom masses must be positive")
        total = sum((m for _, m in self.atoms), Fraction(0))
        if total != 1:
            raise InvalidDistribution(f"Atom masses sum to {total}, not 1")

    @property
    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def masses(self) -> tuple[Fraction, ...]:
        return tuple(m for _, m in self.atoms)

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def mass(self, value) -> Fraction:
        """The mass at `value` (0 off the support)."""
        value = Fraction(value)
        for v, m in self.atoms:
            if v == value:
                return m
        return Fraction(0)

    def is_symmetric(self) -> bool:
        return all(self.mass(-v) == m for v, m in self.atoms)


def from_masses(masses: Mapping | Iterable[tuple]) -> DiscreteDist:
    """Build a distribution from value -> mass pairs, merging equal values."""
    items = masses.items() if isinstance(masses, Mapping) else masses
    merged = defaultdict(Fraction)
    for value, mass in items:
        merged[parse_rational(value)] += parse_rational(mass)
    atoms = tuple(sorted((v, m) for v, m in merged.items() if m != 0))
    return DiscreteDist(atoms=atoms)


def point_mass(value=0) -> DiscreteDist:
    return DiscreteDist(atoms=((parse_rational(value), Fraction(1)),))


def bernoulli_lazy(mu=1) -> DiscreteDist:
    """The lazy Bernoulli eta^(mu): +-1 with probability mu/2 each, 0 otherwise."""
    mu = parse_rational(mu)
    if not 0 < mu <= 1:
        raise InvalidParameter(f"Laziness must lie in (0, 1], got {mu}")
    return from_masses({-1: mu / 2, 0: 1 - mu, 1: mu / 2})


def negate(xi: DiscreteDist) -> DiscreteDist:
    return from_masses((-v, m) for v, m in xi.atoms)


def scale(xi: DiscreteDist, c) -> DiscreteDist:
    """The law of c * xi."""
    c = parse_rational(c)
    return from_masses((c * v, m) for v, m in xi.atoms)


def convolve(xi: DiscreteDist, zeta: DiscreteDist) -> DiscreteDist:
    """The law of xi + zeta for independent xi and zeta."""
    return from_masses(
        (u + v, m * w) for u, m in xi.atoms for v, w in zeta.atoms
    )


def product(xi: DiscreteDist, zeta: DiscreteDist) -> DiscreteDist:
    """The law of xi * zeta for independent xi and zeta."""
    return from_masses(
        (u * v, m * w) for u, m in xi.atoms for v, w in zeta.atoms
    )


def symmetrize(xi: DiscreteDist) -> DiscreteDist:
    """The law of xi - xi' where xi' is an independent copy of xi."""
    return convolve(xi, negate(xi))


def lazy_product(zeta: DiscreteDist, mu) -> DiscreteDist:
    """The law of eta^(mu) * Z with Z ~ zeta independent."""
    return product(bernoulli_lazy(mu), zeta)


def certificate_z_dist(xi: DiscreteDist) -> DiscreteDist:
    """The law of eta^(1/2) (xi - xi') used to verify structure certificates."""
    return lazy_product(symmetrize(xi), Fraction(1, 2))


def scaled_certificate_z_dist(xi: DiscreteDist) -> DiscreteDist:
    """The law of 2 eta^(1/2) (xi - xi')."""
    return scale(certificate_z_dist(xi), 2)
