import platform
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from common.errors import ConfigInvalid, InvalidParameter, LittlewoodOffordError
from constructions.builders import (
    build_linear_gap_instance,
    build_mixed_instance,
    build_quadratic_gap_instance,
    build_rank_one_instance,
    certify_instance,
)
from constructions.parameters import (
    KIND_NAMES,
    KINDS,
    LINEAR_GAP,
    QUADRATIC_GAP,
    RANK_ONE,
)
from decoupling.check import decoupling_check, decoupling_sweep
from decoupling.mask import SubsetMask
from decoupling.parameters import DEFAULT_C_LOG
from inverse.bilinear import bilinear_certificate
from inverse.fit import fit_gap_linear
from inverse.parameters import EXACT, EXHAUSTIVE, SAMPLED, SUBSET_SAMPLE, Y_SAMPLE
from inverse.quadratic import quadratic_certificate
from inverse.structures import FitParams
from inverse.verify import verify_certificate
from mathutil.rationals import format_rational, parse_rational
from smallball.exact import rho_exact
from smallball.forms import FORMS, LINEAR, MONTE_CARLO, QUADRATIC, SmallBallQuery
from smallball.montecarlo import rho_monte_carlo

from .accept import acceptance_suite
from .config import ExperimentConfig
from .parameters import MC, QUICK, SUP
from .report import print_certificate
from .serialize import (
    canonical_json,
    certificate_from_json,
    certificate_to_json,
    coeff_matrix_from_json,
    coeff_vector_from_json,
    decoupling_report_to_json,
    dist_from_spec,
    estimate_to_json,
    gap_fit_to_json,
    gap_from_json,
    instance_to_json,
    load_json,
    malformed,
    trace_to_json,
    vector_from_json,
)

# Marks an option without a default
REQUIRED = object()

PACKAGES = ("numpy", "polars", "ortools", "sympy", "mpmath", "scipy")


@dataclass
class RunReport:
    """The outcome of one task: config echo, payload or error, timing and versions.

    Only `timing` varies between identical runs.
    """

    config: dict
    seed: int
    payload: dict | None = None
    error: dict | None = None
    timing: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 0 if self.error is None else self.error["exit_code"]

    def payload_json(self) -> str:
        return canonical_json(self.payload)

    def to_json(self) -> str:
        return canonical_json(
            {
                "config": self.config,
                "seed": self.seed,
                "payload": self.payload,
                "error": self.error,
                "timing": self.timing,
                "versions": self.versions,
            }
        )


def run(config: ExperimentConfig, log: bool = False) -> RunReport:
    """Dispatch the config's task, catch library errors and persist the report."""
    report = RunReport(config=config.to_dict(), seed=config.seed, versions=_versions())
    start = time.perf_counter()
    try:
        report.payload, timing = TASKS[config.task](config, log)
        report.timing.update(timing)
    except LittlewoodOffordError as e:
        report.error = {
            "class": type(e).__name__,
            "message": str(e),
            "exit_code": e.exit_code,
        }
    report.timing["seconds"] = time.perf_counter() - start
    if config.output is not None:
        Path(config.output).write_text(report.to_json() + "\n", encoding="utf-8")
    return report


def _versions() -> dict:
    versions = {"python": platform.python_version()}
    for package in PACKAGES:
        try:
            versions[package] = version(package)
        except PackageNotFoundError:
            versions[package] = None
    return versions


def _input(config: ExperimentConfig, name: str):
    if name not in config.inputs:
        raise ConfigInvalid(f"Task {config.task} needs an input file {name!r}")
    return load_json(config.inputs[name])


def _option(config: ExperimentConfig, name: str, default=REQUIRED):
    """A task setting; command-line options override the parameters file."""
    settings = {**config.parameters, **config.options}
    if name in settings:
        return settings[name]
    if default is REQUIRED:
        raise ConfigInvalid(f"Task {config.task} needs the option {name!r}")
    return default


def _int_option(config: ExperimentConfig, name: str, default=REQUIRED) -> int:
    value = _option(config, name, default)
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ConfigInvalid(f"Option {name} must be an integer, got {value!r}")
    with malformed(f"option {name}"):
        return int(value)


def _center(value):
    """None for the sup over centers, else a fixed center."""
    if value is None or value == SUP:
        return None
    with malformed("center"):
        if isinstance(value, str):
            return vector_from_json(value.split(","))
        return vector_from_json(value)


def _fit_params(config: ExperimentConfig) -> FitParams:
    return FitParams.from_dict({"beta": config.beta, **config.parameters})


# Tasks
# -----


def _run_rho(config: ExperimentConfig, log: bool):
    spec = _input(config, "matrix")
    if not isinstance(spec, dict):
        spec = {"coefficients": spec}
    if "coefficients" not in spec:
        raise ConfigInvalid("A form file needs a coefficients field")
    form = config.options.get("form", spec.get("form", LINEAR))
    if form not in FORMS:
        raise ConfigInvalid(f"Unknown form {form!r}; forms are {list(FORMS)}")
    if form == LINEAR:
        coefficients = coeff_vector_from_json(spec["coefficients"])
    else:
        coefficients = coeff_matrix_from_json(
            spec["coefficients"], symmetric=spec.get("symmetric", form == QUADRATIC)
        )
    query = SmallBallQuery(
        beta=config.beta,
        form=form,
        coefficients=coefficients,
        dist=dist_from_spec(config.dist),
        b=coeff_vector_from_json(spec["b"]) if "b" in spec else None,
        center=_center(config.options.get("center", spec.get("center"))),
        dist_y=dist_from_spec(spec["dist_y"]) if "dist_y" in spec else None,
    )
    mode = config.options.get("mode", EXACT)
    if mode == EXACT:
        estimate = rho_exact(query, config.budget)
    elif mode in (MC, MONTE_CARLO):
        with malformed("center grid"):
            grid = [
                vector_from_json(c)
                for c in config.options.get("center_grid", spec.get("center_grid", []))
            ]
        estimate = rho_monte_carlo(
            query, _int_option(config, "samples"), config.seed, grid or None
        )
    else:
        raise ConfigInvalid(f"Unknown mode {mode!r}; modes are exact and mc")
    if log:
        print(f"rho = {estimate.value}")
    return estimate_to_json(estimate), {}


def _run_construct(config: ExperimentConfig, log: bool):
    kind = _option(config, "kind")
    kind = KIND_NAMES.get(kind, kind)
    if kind not in KINDS:
        raise ConfigInvalid(
            f"Unknown instance kind {kind!r}; kinds are {list(KIND_NAMES)}"
        )
    n = _int_option(config, "n")
    with malformed("delta"):
        delta = parse_rational(_option(config, "delta", 0))
    if kind == RANK_ONE:
        with malformed("k"):
            k = [int(v) for v in _option(config, "k")]
        b = coeff_vector_from_json(_option(config, "b"))
        instance = build_rank_one_instance(n, k, b, delta, config.seed)
    else:
        gap = _option(config, "gap", None)
        Q = gap_from_json(_input(config, "gap") if gap is None else gap)
        if kind == LINEAR_GAP:
            instance = build_linear_gap_instance(n, Q, delta, config.seed)
        elif kind == QUADRATIC_GAP:
            instance = build_quadratic_gap_instance(n, Q, delta, config.seed)
        else:
            with malformed("K"):
                K = [[int(v) for v in row] for row in _option(config, "K")]
            B = [coeff_vector_from_json(row) for row in _option(config, "B")]
            instance = build_mixed_instance(n, Q, len(K), K, B, delta, config.seed)
    check = certify_instance(instance, config.budget)
    if log:
        print(f"rho at witness {check.witness_rho} >= {check.claimed_rho_lower}")
    out = _option(config, "out", None)
    if out is not None:
        Path(out).write_text(
            canonical_json(instance_to_json(instance)) + "\n", encoding="utf-8"
        )
    payload = {
        "instance": instance_to_json(instance),
        "check": {
            "witness_rho": format_rational(check.witness_rho),
            "claimed_rho_lower": format_rational(check.claimed_rho_lower),
            "satisfied": check.satisfied,
        },
    }
    return payload, {}


def _run_decouple(config: ExperimentConfig, log: bool):
    A = coeff_matrix_from_json(_input(config, "matrix"))
    b = config.options.get("b")
    kwargs = {
        "b": None if b is None else coeff_vector_from_json(b),
        "center": _center(config.options.get("center")),
        "c_log": config.options.get("c_log", DEFAULT_C_LOG),
        "budget": config.budget,
    }
    xi = dist_from_spec(config.dist)
    if "subset" in config.options:
        U = SubsetMask.from_bits(config.options["subset"], A.n)
        report = decoupling_check(A, U, config.beta, xi, **kwargs)
        return decoupling_report_to_json(report), {}
    frame = decoupling_sweep(A, config.beta, xi, **kwargs)
    if log:
        print(frame)
    return {"subsets": frame.drop("constant_floor").to_dicts()}, {}


def _run_inverse_linear(config: ExperimentConfig, log: bool):
    points = [vector_from_json(p) for p in _input(config, "points")]
    fit = fit_gap_linear(points, _fit_params(config))
    if log:
        print("No fit reaches the coverage floor" if fit is None else fit.gap)
    return {"fit": gap_fit_to_json(fit)}, {}


def _run_inverse_bilinear(config: ExperimentConfig, log: bool):
    A = coeff_matrix_from_json(
        _input(config, "matrix"), symmetric=config.options.get("symmetric", False)
    )
    mode = config.options.get("mode", EXACT)
    if mode not in (EXACT, SAMPLED):
        raise ConfigInvalid(f"Unknown y mode {mode!r}")
    cert, trace = bilinear_certificate(
        A,
        dist_from_spec(config.dist),
        config.beta,
        params=_fit_params(config),
        mode=mode,
        seed=config.seed,
        count=_int_option(config, "count", Y_SAMPLE),
        budget=config.budget,
        log=log,
    )
    if log:
        print_certificate(cert)
    return _certificate_payload(cert, trace)


def _run_inverse_quadratic(config: ExperimentConfig, log: bool):
    A = coeff_matrix_from_json(_input(config, "matrix"))
    subset_mode, count = parse_subsets(config.options.get("subsets"))
    cert, trace = quadratic_certificate(
        A,
        dist_from_spec(config.dist),
        config.beta,
        params=_fit_params(config),
        subset_mode=subset_mode,
        seed=config.seed,
        count=count,
        y_mode=config.options.get("y_mode", EXACT),
        y_count=_int_option(config, "y_count", Y_SAMPLE),
        budget=config.budget,
        log=log,
    )
    if log:
        print_certificate(cert)
    return _certificate_payload(cert, trace)


def _certificate_payload(cert, trace):
    return {"certificate": certificate_to_json(cert), "trace": trace_to_json(trace)}, {}


def parse_subsets(value: str | None) -> tuple[str | None, int]:
    """Read "exhaustive" or "sample:COUNT"; None picks the mode from n."""
    if value is None:
        return None, SUBSET_SAMPLE
    if not isinstance(value, str):
        raise ConfigInvalid(f"Subsets must be a string, got {value!r}")
    if value == EXHAUSTIVE:
        return EXHAUSTIVE, SUBSET_SAMPLE
    prefix, _, count = value.partition(":")
    if prefix != "sample":
        raise ConfigInvalid(
            f"Subsets must be exhaustive or sample:COUNT, got {value!r}"
        )
    try:
        return SAMPLED, int(count) if count else SUBSET_SAMPLE
    except ValueError as e:
        raise ConfigInvalid(f"Not a subset count: {count!r}") from e


def _run_verify(config: ExperimentConfig, log: bool):
    A = coeff_matrix_from_json(
        _input(config, "matrix"), symmetric=config.options.get("symmetric", True)
    )
    cert = certificate_from_json(_input(config, "cert"))
    missing = [i for i in cert.surviving if i not in cert.row_coeffs]
    if missing or any(not 0 <= i < A.n for i in cert.surviving + cert.pivot_rows):
        raise InvalidParameter("The certificate does not fit the matrix")
    probabilities = verify_certificate(
        A, cert, dist_from_spec(config.dist), config.beta, config.budget
    )
    floor = Fraction(1, A.n**cert.bound_exponent)
    if log:
        print_certificate(cert, probabilities)
    payload = {
        "rows": {str(i): format_rational(p) for i, p in probabilities.items()},
        "floor": format_rational(floor),
        "passed": all(p >= floor for p in probabilities.values()),
    }
    return payload, {}


def _run_accept(config: ExperimentConfig, log: bool):
    frame = acceptance_suite(config.options.get("level", QUICK), log=log)
    payload = {
        "criteria": frame.drop("seconds").to_dicts(),
        "passed": bool(frame["passed"].all()),
    }
    timing = {row["criterion"]: row["seconds"] for row in frame.to_dicts()}
    return payload, timing


TASKS = {
    "rho": _run_rho,
    "construct": _run_construct,
    "decouple": _run_decouple,
    "inverse-linear": _run_inverse_linear,
    "inverse-bilinear": _run_inverse_bilinear,
    "inverse-quadratic": _run_inverse_quadratic,
    "verify": _run_verify,
    "accept": _run_accept,
}
