from dataclasses import replace
from fractions import Fraction

from common.budgets import DEFAULT_BUDGET
from mathutil.rationals import Vector, combine, zero_vector
from randvar.distribution import DiscreteDist
from smallball.exact import ball_mass, linear_law
from smallball.forms import CoeffMatrix

from .fit import fit_gap_linear
from .structures import FitParams, GapFit, StructureCertificate


def combined_row(A: CoeffMatrix, cert: StructureCertificate, i: int) -> list[Vector]:
    """The entries of k row_i(A) + sum_j k_ij row_{i_j}(A)."""
    coefficients = [cert.k, *cert.row_coeffs[i]]
    rows = [i, *cert.pivot_rows]
    return [
        combine(coefficients, [A.entries[r][col] for r in rows], A.dim)
        for col in range(A.n)
    ]


def verify_certificate(
    A: CoeffMatrix,
    cert: StructureCertificate,
    z_dist: DiscreteDist,
    beta,
    budget: int = DEFAULT_BUDGET,
) -> dict[int, Fraction]:
    """Exact P_z(|z . combined_row_i| <= beta n^C) for every surviving row i.

    Callers compare the result with the floor n^-C. For small n and the default
    C = 3 the radius beta n^C exceeds |z . w| for rows w with small entries, so only
    a small bound_exponent makes the check tell annihilated rows from others.
    """
    radius = Fraction(beta) * Fraction(A.n) ** cert.bound_exponent
    origin = zero_vector(A.dim)
    probabilities = dict()
    for i in cert.surviving:
        law = linear_law(combined_row(A, cert, i), z_dist, budget)
        probabilities[i] = ball_mass(law, origin, radius)
    return probabilities


def residual_fit(
    A: CoeffMatrix, cert: StructureCertificate, params: FitParams
) -> dict[int, GapFit | None]:
    """Fit a GAP to the entries of every combined row at radius beta n^C."""
    scaled = replace(params, beta=params.beta * Fraction(A.n) ** cert.bound_exponent)
    return {i: fit_gap_linear(combined_row(A, cert, i), scaled) for i in cert.surviving}
