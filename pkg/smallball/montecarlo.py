from collections.abc import Sequence

import numpy as np
from scipy.stats import norm

from common.budgets import MC_CONFIDENCE, MC_STREAMS, MC_TOLERANCE
from common.errors import EmptyCenterGrid, InvalidParameter, SizeMismatch
from mathutil.parallel import parallel_map
from mathutil.rationals import Vector, as_vector
from mathutil.seeds import spawn_streams, split_samples

from .forms import BILINEAR, LINEAR, MONTE_CARLO, SmallBallEstimate, SmallBallQuery


def rho_monte_carlo(
    query: SmallBallQuery,
    samples: int,
    seed: int,
    center_grid: Sequence[Vector] | None = None,
) -> SmallBallEstimate:
    """Estimate the small-ball probability by iid sampling.

    A fixed center gives the empirical frequency with a two-sided normal interval.
    In sup mode the best frequency over `center_grid` is reported, which estimates
    a lower bound on the sup. The result depends only on (seed, samples).
    """
    if samples < 1:
        raise InvalidParameter(f"Need at least one sample, got {samples}")
    if query.center is not None:
        centers = [query.center]
    elif center_grid:
        centers = [as_vector(c) for c in center_grid]
    else:
        raise EmptyCenterGrid("Sup mode needs a nonempty grid of candidate centers")
    if any(len(c) != query.dim for c in centers):
        raise SizeMismatch("Center dimension does not match the form")

    arrays = _as_arrays(query)
    grid = np.array([[float(a) for a in c] for c in centers])
    radius_sq = float(query.beta) ** 2 + MC_TOLERANCE

    # Fixed number of sub-streams, so the split never depends on the worker count
    streams = spawn_streams(seed, MC_STREAMS)
    tasks = [
        (query.form, arrays, rng, count, grid, radius_sq)
        for rng, count in zip(streams, split_samples(samples, MC_STREAMS), strict=True)
    ]
    hits = sum(parallel_map(_count_hits, tasks, work=samples * len(centers)))

    frequencies = hits / samples
    best = int(np.argmax(frequencies))
    p = float(frequencies[best])
    z = norm.ppf(1 - (1 - MC_CONFIDENCE) / 2)
    half_width = z * np.sqrt(p * (1 - p) / samples)
    return SmallBallEstimate(
        kind=MONTE_CARLO,
        value=p,
        ci_low=max(0.0, p - half_width),
        ci_high=min(1.0, p + half_width),
        samples=samples,
        seed=seed,
    )


def _as_arrays(query: SmallBallQuery) -> dict:
    """Float copies of the coefficients and atoms used for sampling."""
    arrays = {
        "x_values": np.array([float(v) for v in query.dist.values]),
        "x_masses": np.array([float(m) for m in query.dist.masses]),
        "y_values": np.array([float(v) for v in query.y_dist.values]),
        "y_masses": np.array([float(m) for m in query.y_dist.masses]),
    }
    if query.form == LINEAR:
        arrays["a"] = np.array(
            [[float(c) for c in a] for a in query.coefficients.entries]
        )
    else:
        arrays["A"] = np.array(
            [[[float(c) for c in a] for a in row] for row in query.coefficients.entries]
        )
        arrays["b"] = np.array(
            [[float(c) for c in a] for a in query.linear_part.entries]
        )
    return arrays


def _count_hits(task) -> np.ndarray:
    """Per-center hit counts for one sub-stream."""
    form, arrays, rng, count, grid, radius_sq = task
    values = sample_form_values(form, arrays, rng, count)
    diff = values[:, None, :] - grid[None, :, :]
    return (np.sum(diff**2, axis=2) <= radius_sq).sum(axis=0)


def sample_form_values(
    form: str, arrays: dict, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Draw `count` values of the form, shape (count, d)."""
    n = len(arrays["a"]) if form == LINEAR else len(arrays["A"])
    x = rng.choice(arrays["x_values"], size=(count, n), p=arrays["x_masses"])
    if form == LINEAR:
        return x @ arrays["a"]
    if form == BILINEAR:
        y = rng.choice(arrays["y_values"], size=(count, n), p=arrays["y_masses"])
        return np.einsum("si,ijd,sj->sd", x, arrays["A"], y)
    return np.einsum("si,ijd,sj->sd", x, arrays["A"], x) + x @ arrays["b"]
