from contextlib import contextmanager
from fractions import Fraction

from mpmath import iv

# Working precision for certified bounds
INTERVAL_BITS = 128


@contextmanager
def interval_precision(bits: int = INTERVAL_BITS):
    """Temporarily set the precision of mpmath's interval context."""
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _to_fraction(raw) -> Fraction:
    # A raw mpf is (sign, mantissa, exponent, bitcount), so the conversion is exact
    sign, mantissa, exponent, _ = raw
    value = Fraction(int(mantissa)) * Fraction(2) ** int(exponent)
    return -value if sign else value


def _bounds(interval) -> tuple[Fraction, Fraction]:
    lo, hi = interval._mpi_
    return _to_fraction(lo), _to_fraction(hi)


def log_bounds(n: int) -> tuple[Fraction, Fraction]:
    """Rational (lo, hi) enclosing log(n)."""
    if n == 1:
        return Fraction(0), Fraction(0)
    with interval_precision():
        return _bounds(iv.log(iv.mpf(n)))


def decoupling_denominator_bounds(
    dim: int, exp_coefficient: int = 4
) -> tuple[Fraction, Fraction]:
    """Rational (lo, hi) enclosing (2*pi)**(7*dim/2) * exp(exp_coefficient*pi)."""
    with interval_precision():
        two_pi = 2 * iv.pi
        value = iv.sqrt(two_pi ** (7 * dim)) * iv.exp(exp_coefficient * iv.pi)
        return _bounds(value)
