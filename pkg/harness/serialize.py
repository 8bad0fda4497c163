import json
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from common.errors import ConfigInvalid, InvalidDistribution, LittlewoodOffordError
from constructions.instances import StructuredInstance
from decoupling.check import DecouplingReport
from gap.core import Gap, GapPoint, singleton_gap, symmetric_gap
from inverse.structures import GapFit, PipelineTrace, StructureCertificate
from mathutil.rationals import Vector, format_rational, parse_rational
from randvar.distribution import (
    DiscreteDist,
    bernoulli_lazy,
    certificate_z_dist,
    from_masses,
)
from smallball.forms import CoeffMatrix, CoeffVector, SmallBallEstimate

from .parameters import DIST_PRESETS


def canonical_json(obj) -> str:
    """Sorted-key JSON, so equal payloads give equal bytes."""
    return json.dumps(obj, sort_keys=True, indent=2)


@contextmanager
def malformed(what: str):
    """Turn the parsing errors raised inside the block into ConfigInvalid."""
    try:
        yield
    except LittlewoodOffordError:
        raise
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise ConfigInvalid(f"Malformed {what}: {e!r}") from e


def load_json(path: str | Path):
    """Read a JSON file, raising ConfigInvalid when it is missing or malformed."""
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(f"File {path} does not exist")
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"Malformed JSON in {path}: {e}") from e


# Vectors and coefficients
# ------------------------


def vector_to_json(v: Vector) -> list[str]:
    return [format_rational(a) for a in v]


def vector_from_json(value) -> Vector:
    """A scalar or a list of scalars; scalars are "p/q" strings or numbers."""
    if isinstance(value, list):
        return tuple(parse_rational(a) for a in value)
    return (parse_rational(value),)


def coeff_vector_from_json(values: list) -> CoeffVector:
    with malformed("coefficient vector"):
        return CoeffVector(entries=tuple(vector_from_json(v) for v in values))


def coeff_vector_to_json(a: CoeffVector) -> list:
    return [vector_to_json(v) for v in a.entries]


def coeff_matrix_from_json(rows: list, symmetric: bool = True) -> CoeffMatrix:
    with malformed("coefficient matrix"):
        return CoeffMatrix(
            entries=tuple(tuple(vector_from_json(v) for v in row) for row in rows),
            symmetric=symmetric,
        )


def coeff_matrix_to_json(A: CoeffMatrix) -> list:
    return [[vector_to_json(v) for v in row] for row in A.entries]


# Distributions
# -------------


def dist_from_spec(spec) -> DiscreteDist:
    """Parse a distribution.

    Accepts a preset name, "lazy:mu", an {"atoms": [[value, mass], ...]} object or
    the bare list of atoms.
    """
    if isinstance(spec, dict):
        if set(spec) != {"atoms"}:
            raise InvalidDistribution(
                f"A distribution object has exactly one key, atoms; got {sorted(spec)}"
            )
        spec = spec["atoms"]
    if isinstance(spec, list):
        try:
            atoms = [(parse_rational(v), parse_rational(m)) for v, m in spec]
        except (TypeError, ValueError) as e:
            raise InvalidDistribution(f"Atoms must be [value, mass] pairs: {e}") from e
        return from_masses(atoms)
    if not isinstance(spec, str):
        raise InvalidDistribution(f"Cannot read a distribution from {spec!r}")
    if spec.startswith("lazy:"):
        return bernoulli_lazy(parse_rational(spec.removeprefix("lazy:")))
    if spec not in DIST_PRESETS:
        raise InvalidDistribution(
            f"Unknown distribution {spec!r}; presets are {sorted(DIST_PRESETS)}"
        )
    if spec == "bernoulli":
        return bernoulli_lazy(1)
    return certificate_z_dist(bernoulli_lazy(1))


def dist_to_json(xi: DiscreteDist) -> dict:
    return {"atoms": [[format_rational(v), format_rational(m)] for v, m in xi.atoms]}


# GAPs
# ----


def gap_to_json(Q: Gap) -> dict:
    return {
        "ambient_dim": Q.ambient_dim,
        "offset": vector_to_json(Q.offset),
        "generators": [vector_to_json(g) for g in Q.generators],
        "lower_bounds": list(Q.lower_bounds),
        "upper_bounds": list(Q.upper_bounds),
        "symmetric": Q.symmetric,
    }


def gap_from_json(obj: dict) -> Gap:
    """Read a GAP; symmetric ones may give just generators and dimensions."""
    with malformed("GAP"):
        if "dimensions" in obj:
            if not obj["generators"]:
                return singleton_gap(vector_from_json(obj.get("offset", [0])))
            return symmetric_gap(
                [vector_from_json(g) for g in obj["generators"]],
                [int(k) for k in obj["dimensions"]],
            )
        offset = vector_from_json(obj["offset"])
        ambient_dim = int(obj.get("ambient_dim", len(offset)))
        if ambient_dim != len(offset):
            raise ConfigInvalid(
                f"ambient_dim {ambient_dim} does not match the offset {obj['offset']}"
            )
        return Gap(
            ambient_dim=ambient_dim,
            generators=tuple(vector_from_json(g) for g in obj["generators"]),
            offset=offset,
            lower_bounds=tuple(int(k) for k in obj["lower_bounds"]),
            upper_bounds=tuple(int(k) for k in obj["upper_bounds"]),
            symmetric=bool(obj.get("symmetric", False)),
        )


def gap_point_to_json(p: GapPoint) -> dict:
    return {"coords": list(p.coords), "value": vector_to_json(p.value)}


def gap_fit_to_json(fit: GapFit | None) -> dict | None:
    if fit is None:
        return None
    return {
        "gap": gap_to_json(fit.gap),
        "covered": list(fit.covered),
        "assignments": {
            str(i): gap_point_to_json(p) for i, p in fit.assignments.items()
        },
    }


# Results
# -------


def estimate_to_json(estimate: SmallBallEstimate) -> dict:
    def number(x):
        return format_rational(x) if isinstance(x, Fraction | int) else x

    return {
        "kind": estimate.kind,
        "value": number(estimate.value),
        "lower": None if estimate.lower is None else number(estimate.lower),
        "upper": None if estimate.upper is None else number(estimate.upper),
        "ci_low": estimate.ci_low,
        "ci_high": estimate.ci_high,
        "samples": estimate.samples,
        "seed": estimate.seed,
    }


def instance_to_json(instance: StructuredInstance) -> dict:
    if isinstance(instance.coefficients, CoeffVector):
        coefficients = coeff_vector_to_json(instance.coefficients)
    else:
        coefficients = coeff_matrix_to_json(instance.coefficients)
    return {
        "kind": instance.kind,
        "coefficients": coefficients,
        "gap": None if instance.gap is None else gap_to_json(instance.gap),
        "delta": format_rational(instance.delta),
        "hidden": instance.hidden,
        "claimed_beta": format_rational(instance.claimed_beta),
        "claimed_rho_lower": format_rational(instance.claimed_rho_lower),
        "witness_center": vector_to_json(instance.witness_center),
    }


def decoupling_report_to_json(report: DecouplingReport) -> dict:
    return {
        "subset": report.subset,
        "lhs_rho": format_rational(report.lhs_rho),
        "lhs_upper": format_rational(report.lhs_upper),
        "rhs_prob": format_rational(report.rhs_prob),
        "tau_sq": format_rational(report.tau_sq),
        "tau": format_rational(report.tau),
        "constant_floor": format_rational(report.constant_floor),
        "floor_8pi": format_rational(report.floor_8pi),
        "verdict": report.verdict,
        "min_c_log": (
            None if report.min_c_log is None else format_rational(report.min_c_log)
        ),
        "condition_prob": format_rational(report.condition_prob),
        "condition_satisfied": report.condition_satisfied,
    }


def certificate_to_json(cert: StructureCertificate) -> dict:
    return {
        "k": cert.k,
        "pivot_rows": list(cert.pivot_rows),
        "row_coeffs": {str(i): list(c) for i, c in cert.row_coeffs.items()},
        "surviving": list(cert.surviving),
        "bound_exponent": cert.bound_exponent,
    }


def certificate_from_json(obj: dict) -> StructureCertificate:
    with malformed("certificate"):
        return StructureCertificate(
            k=int(obj["k"]),
            pivot_rows=tuple(int(i) for i in obj["pivot_rows"]),
            row_coeffs={
                int(i): tuple(int(c) for c in cs) for i, cs in obj["row_coeffs"].items()
            },
            surviving=tuple(int(i) for i in obj["surviving"]),
            bound_exponent=int(obj["bound_exponent"]),
        )


def trace_to_json(trace: PipelineTrace) -> dict:
    return {
        "rho": None if trace.rho is None else format_rational(trace.rho),
        "good_mass": format_rational(trace.good_mass),
        "good_vectors": trace.good_vectors,
        "common_index_tuple": list(trace.common_index_tuple),
        "common_coeff_matrix": [list(row) for row in trace.common_coeff_matrix],
        "common_mass": format_rational(trace.common_mass),
        "identities": {str(i): record for i, record in trace.identities.items()},
        "tight_exponent": trace.tight_exponent,
        "subset_votes": trace.subset_votes,
        "verification": trace.verification,
    }
