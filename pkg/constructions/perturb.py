from fractions import Fraction

import numpy as np

from mathutil.rationals import Vector, zero_vector

from .parameters import PERTURBATION_LATTICE


def lattice_perturbation(
    rng: np.random.Generator, dim: int, delta: Fraction
) -> Vector:
    """A seeded rational vector of norm at most delta.

    The vector is delta * z / L for an integer point z drawn uniformly from the
    radius-L ball, so its norm is checkable exactly.
    """
    if delta == 0:
        return zero_vector(dim)
    L = PERTURBATION_LATTICE
    while True:
        z = rng.integers(-L, L + 1, size=dim)
        if int(np.sum(z.astype(np.int64) ** 2)) <= L * L:
            return tuple(delta * Fraction(int(c), L) for c in z)
