import math
from collections.abc import Iterable

import polars as pl

from common.budgets import DEFAULT_BUDGET
from mathutil.rationals import format_rational, parse_rational
from randvar.distribution import bernoulli_lazy

from .exact import rho_linear_exact
from .forms import LINEAR, SmallBallQuery, coeff_vector
from .parameters import PROFILE_BETA


def erdos_profile(
    ns: Iterable[int], beta=PROFILE_BETA, budget: int = DEFAULT_BUDGET
) -> pl.DataFrame:
    """rho(n) and rho(n) * sqrt(n) for the all-ones Bernoulli sum of length n."""
    beta = parse_rational(beta)
    rows = []
    for n in ns:
        query = SmallBallQuery(
            beta=beta,
            form=LINEAR,
            coefficients=coeff_vector([1] * n),
            dist=bernoulli_lazy(1),
        )
        rho = rho_linear_exact(query, budget).value
        rows.append(
            {
                "n": n,
                "rho": format_rational(rho),
                "scaled": float(rho) * math.sqrt(n),
            }
        )
    return pl.DataFrame(
        rows, schema={"n": pl.Int64, "rho": pl.String, "scaled": pl.Float64}
    )
