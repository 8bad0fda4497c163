import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Any

from common.budgets import PARALLEL_MIN_WORK, THREADS_ENV_VAR
from common.errors import ConfigInvalid


def thread_count() -> int:
    """Number of worker processes allowed by LO_THREADS (default: all cores)."""
    value = os.environ.get(THREADS_ENV_VAR)
    if value is None or value == "":
        return os.cpu_count() or 1
    try:
        count = int(value)
    except ValueError as e:
        raise ConfigInvalid(
            f"{THREADS_ENV_VAR} must be an integer, got {value!r}"
        ) from e
    if count < 1:
        raise ConfigInvalid(f"{THREADS_ENV_VAR} must be positive, got {count}")
    return count


def parallel_map(
    fn: Callable[[Any], Any], items: Sequence[Any], work: int = 0
) -> list[Any]:
    """Map `fn` over `items`, in worker processes when the work is large enough.

    The output order always equals the input order.
    """
    workers = min(thread_count(), len(items))
    if workers <= 1 or work < PARALLEL_MIN_WORK:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
