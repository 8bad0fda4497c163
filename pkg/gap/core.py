import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from common.errors import (
    InvalidGap,
    NotSymmetric,
    PointOutsideBox,
    VolumeExceedsCap,
)
from mathutil.linalg import rank
from mathutil.rationals import Vector, combine, dist_sq, vec_add, zero_vector


@dataclass(frozen=True)
class Gap:
    """A generalized arithmetic progression {g_0 + sum k_i g_i : K_i <= k_i <= K_i'}."""

    ambient_dim: int
    generators: tuple[Vector, ...]
    offset: Vector
    lower_bounds: tuple[int, ...]
    upper_bounds: tuple[int, ...]
    symmetric: bool

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise InvalidGap(f"Ambient dimension must be positive: {self.ambient_dim}")
        if len(self.offset) != self.ambient_dim:
            raise InvalidGap("Offset dimension does not match the ambient dimension")
        if any(len(g) != self.ambient_dim for g in self.generators):
            raise InvalidGap("Generator dimension does not match the ambient dimension")
        r = len(self.generators)
        if len(self.lower_bounds) != r or len(self.upper_bounds) != r:
            raise InvalidGap("One lower and one upper bound per generator is required")
        for lo, hi in zip(self.lower_bounds, self.upper_bounds, strict=True):
            if lo > hi:
                raise InvalidGap(f"Empty dimension: {lo} > {hi}")
        if self.symmetric:
            if any(a != 0 for a in self.offset):
                raise InvalidGap("A symmetric GAP must have zero offset")
            if any(
                lo != -hi
                for lo, hi in zip(self.lower_bounds, self.upper_bounds, strict=True)
            ):
                raise InvalidGap("A symmetric GAP must have bounds -K_i..K_i")

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def dimensions(self) -> tuple[int, ...]:
        """The K_i of a symmetric GAP."""
        return self.upper_bounds


@dataclass(frozen=True)
class GapPoint:
    coords: tuple[int, ...]
    value: Vector


def symmetric_gap(generators: Sequence[Vector], dimensions: Sequence[int]) -> Gap:
    """Build the symmetric GAP {sum k_i g_i : |k_i| <= K_i}."""
    generators = tuple(tuple(Fraction(a) for a in g) for g in generators)
    if not generators:
        raise InvalidGap("Use singleton_gap for rank 0")
    dim = len(generators[0])
    return Gap(
        ambient_dim=dim,
        generators=generators,
        offset=zero_vector(dim),
        lower_bounds=tuple(-int(k) for k in dimensions),
        upper_bounds=tuple(int(k) for k in dimensions),
        symmetric=True,
    )


def singleton_gap(offset: Vector) -> Gap:
    """The rank-0 GAP {offset}; symmetric when the offset is zero."""
    offset = tuple(Fraction(a) for a in offset)
    return Gap(
        ambient_dim=len(offset),
        generators=(),
        offset=offset,
        lower_bounds=(),
        upper_bounds=(),
        symmetric=all(a == 0 for a in offset),
    )


def gap_volume(Q: Gap) -> int:
    """Number of integer tuples in the box of Q."""
    return math.prod(
        hi - lo + 1 for lo, hi in zip(Q.lower_bounds, Q.upper_bounds, strict=True)
    )


def point_at(Q: Gap, coords: Sequence[int]) -> GapPoint:
    """Apply the map Phi to a coefficient tuple of the box."""
    coords = tuple(int(k) for k in coords)
    if len(coords) != Q.rank:
        raise PointOutsideBox(f"Expected {Q.rank} coordinates, got {len(coords)}")
    for k, lo, hi in zip(coords, Q.lower_bounds, Q.upper_bounds, strict=True):
        if not lo <= k <= hi:
            raise PointOutsideBox(f"Coordinates {coords} lie outside the box")
    value = vec_add(Q.offset, combine(coords, Q.generators, Q.ambient_dim))
    return GapPoint(coords=coords, value=value)


def _check_cap(Q: Gap, cap: int):
    volume = gap_volume(Q)
    if volume > cap:
        raise VolumeExceedsCap(f"GAP volume {volume} exceeds the cap {cap}")


def gap_enumerate(Q: Gap, cap: int) -> list[GapPoint]:
    """All points of Q in lexicographic order of their coordinates."""
    _check_cap(Q, cap)
    ranges = [
        range(lo, hi + 1)
        for lo, hi in zip(Q.lower_bounds, Q.upper_bounds, strict=True)
    ]
    return [point_at(Q, coords) for coords in itertools.product(*ranges)]


def is_proper(Q: Gap, cap: int) -> bool:
    """Whether Phi is one to one on the box (|Q| = Vol(Q))."""
    values = [p.value for p in gap_enumerate(Q, cap)]
    return len(set(values)) == len(values)


def closest_element(
    Q: Gap, a: Vector, delta: Fraction, cap: int
) -> GapPoint | None:
    """The point of Q nearest to `a` if it lies within `delta`, else None."""
    best = None
    best_dist = None
    # Enumeration is lexicographic, so strict improvement keeps the smallest coords
    for point in gap_enumerate(Q, cap):
        d = dist_sq(point.value, a)
        if best_dist is None or d < best_dist:
            best, best_dist = point, d
    if best is None or best_dist > Fraction(delta) ** 2:
        return None
    return best


def dilate(Q: Gap, m: int) -> Gap:
    """The dilate mQ = {sum k_i g_i : |k_i| <= m K_i}."""
    if not Q.symmetric:
        raise NotSymmetric("Only symmetric GAPs can be dilated")
    if m < 1:
        raise InvalidGap(f"Dilation factor must be positive: {m}")
    return Gap(
        ambient_dim=Q.ambient_dim,
        generators=Q.generators,
        offset=Q.offset,
        lower_bounds=tuple(m * lo for lo in Q.lower_bounds),
        upper_bounds=tuple(m * hi for hi in Q.upper_bounds),
        symmetric=True,
    )


def spans(Q: Gap, U: Sequence[GapPoint]) -> bool:
    """Whether the coordinate tuples of U have full rank r."""
    for point in U:
        # Validates that the point lies in the box
        point_at(Q, point.coords)
    if Q.rank == 0:
        return True
    return rank([p.coords for p in U], Q.rank) == Q.rank
