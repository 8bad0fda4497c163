from collections import defaultdict
from fractions import Fraction


def weighted_mode(items):
    """The key with the largest total weight, smallest key first among ties."""
    totals = defaultdict(Fraction)
    for key, weight in items:
        totals[key] += weight
    return min(totals.items(), key=lambda item: (-item[1], item[0]))[0]


def at_least_power(x: Fraction, n: int, exponent: Fraction) -> bool:
    """Exact test of x >= n^exponent for a rational exponent."""
    if x <= 0:
        return False
    p, q = exponent.numerator, exponent.denominator
    return Fraction(x) ** q >= Fraction(n) ** p


def floor_met(size: int, n: int, epsilon: Fraction) -> bool:
    """Exact test of size >= n - 2 n^epsilon."""
    gap = Fraction(n - size, 2)
    if gap <= 0:
        return True
    p, q = epsilon.numerator, epsilon.denominator
    return gap**q <= Fraction(n) ** p
