import numpy as np


def spawn_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators from `seed`; stream i depends only on (seed, i)."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def split_samples(samples: int, count: int) -> list[int]:
    """Split `samples` over `count` streams; the first streams take the remainder."""
    base, extra = divmod(samples, count)
    return [base + (1 if i < extra else 0) for i in range(count)]


def child_seed(seed: int, *parts: int) -> int:
    """A 63-bit seed derived deterministically from `seed` and integer `parts`."""
    sequence = np.random.SeedSequence([seed, *parts])
    return int(sequence.generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> 1)
