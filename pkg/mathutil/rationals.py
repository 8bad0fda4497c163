import math
from collections.abc import Iterable, Sequence
from fractions import Fraction

from common.errors import InvalidParameter

Vector = tuple[Fraction, ...]


def parse_rational(value: str | int | float | Fraction) -> Fraction:
    """Parse "p/q", decimal strings, ints and floats into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidParameter(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # Use the shortest decimal repr so 0.1 parses as 1/10
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidParameter(f"Not a rational number: {value!r}") from e
    raise InvalidParameter(f"Not a rational number: {value!r}")


def format_rational(value: Fraction | int) -> str:
    """Format a rational as a "p/q" string."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def as_vector(value) -> Vector:
    """Convert a scalar or a sequence of scalars into a vector of Fractions."""
    if isinstance(value, str | int | float | Fraction):
        return (parse_rational(value),)
    return tuple(parse_rational(x) for x in value)


def zero_vector(dim: int) -> Vector:
    return (Fraction(0),) * dim


def vec_add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vec_sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vec_scale(c: Fraction | int, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def vec_sum(vectors: Iterable[Vector], dim: int) -> Vector:
    total = [Fraction(0)] * dim
    for v in vectors:
        for k, a in enumerate(v):
            total[k] += a
    return tuple(total)


def combine(
    coefficients: Sequence[Fraction | int], vectors: Sequence[Vector], dim: int
) -> Vector:
    """Return the linear combination sum(c_i * v_i)."""
    total = [Fraction(0)] * dim
    for c, v in zip(coefficients, vectors, strict=True):
        if c == 0:
            continue
        for k, a in enumerate(v):
            total[k] += c * a
    return tuple(total)


def norm_sq(v: Vector) -> Fraction:
    return sum((a * a for a in v), Fraction(0))


def dist_sq(u: Vector, v: Vector) -> Fraction:
    return sum(((a - b) * (a - b) for a, b in zip(u, v, strict=True)), Fraction(0))


def is_zero(v: Vector) -> bool:
    return all(a == 0 for a in v)


def exact_sqrt(x: Fraction) -> Fraction | None:
    """Return the rational square root of x, or None if it is irrational."""
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def sqrt_bracket(x: Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Return rationals (lo, hi) with lo <= sqrt(x) <= hi and hi - lo <= 2**-bits."""
    if x < 0:
        raise InvalidParameter(f"Cannot take the square root of {x}")
    root = exact_sqrt(x)
    if root is not None:
        return root, root
    scale = 1 << bits
    # floor(sqrt(x) * scale) computed on integers
    lo = math.isqrt(x.numerator * scale * scale // x.denominator)
    return Fraction(lo, scale), Fraction(lo + 1, scale)


def primitive_integer_vector(v: Sequence[Fraction | int]) -> tuple[int, ...]:
    """Clear denominators and divide by the gcd; the first nonzero entry is positive."""
    v = [Fraction(a) for a in v]
    lcm = math.lcm(*(a.denominator for a in v)) if v else 1
    ints = [int(a * lcm) for a in v]
    g = math.gcd(*ints) if ints else 0
    if g == 0:
        return tuple(ints)
    ints = [a // g for a in ints]
    lead = next(a for a in ints if a != 0)
    if lead < 0:
        ints = [-a for a in ints]
    return tuple(ints)
