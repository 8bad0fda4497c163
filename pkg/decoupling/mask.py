from dataclasses import dataclass

from common.errors import InvalidParameter, NotSymmetric, SizeMismatch
from mathutil.rationals import zero_vector
from smallball.forms import CoeffMatrix


@dataclass(frozen=True)
class SubsetMask:
    """A subset U of {0, ..., n-1}."""

    n: int
    members: frozenset[int]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter(f"n must be positive, got {self.n}")
        if any(not 0 <= i < self.n for i in self.members):
            raise InvalidParameter(f"Members must lie in 0..{self.n - 1}")

    @classmethod
    def from_bits(cls, bits: str | int, n: int) -> "SubsetMask":
        """Parse a bitset such as "0b0101"; bit i (counted from the right) is i in U."""
        try:
            value = int(bits, 0) if isinstance(bits, str) else int(bits)
        except ValueError as e:
            raise InvalidParameter(f"Not a bitset: {bits!r}") from e
        if value < 0 or value >> n:
            raise InvalidParameter(f"Bitset {bits!r} does not fit in {n} bits")
        return cls(n=n, members=frozenset(i for i in range(n) if value >> i & 1))

    @property
    def bits(self) -> str:
        value = sum(1 << i for i in self.members)
        return "0b" + format(value, f"0{self.n}b")

    def complement(self) -> "SubsetMask":
        return SubsetMask(n=self.n, members=frozenset(range(self.n)) - self.members)


def all_masks(n: int) -> list[SubsetMask]:
    """Every subset of {0, ..., n-1}, in bitset order."""
    return [SubsetMask.from_bits(value, n) for value in range(1 << n)]


def mask_matrix(A: CoeffMatrix, U: SubsetMask) -> CoeffMatrix:
    """Keep a_ij exactly when one of i, j lies in U and the other does not."""
    if A.n != U.n:
        raise SizeMismatch(f"Matrix has size {A.n} but the subset is over {U.n}")
    if not A.symmetric:
        raise NotSymmetric("Masking needs a symmetric matrix")
    zero = zero_vector(A.dim)
    entries = tuple(
        tuple(
            A.entries[i][j] if (i in U.members) != (j in U.members) else zero
            for j in range(A.n)
        )
        for i in range(A.n)
    )
    return CoeffMatrix(entries=entries)
