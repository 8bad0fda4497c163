import argparse
import sys
import warnings

from common.budgets import DEFAULT_BUDGET
from common.errors import ConfigInvalid, LittlewoodOffordError
from constructions.parameters import KIND_NAMES
from harness.config import ExperimentConfig, load_config
from harness.parameters import DEFAULT_BETA, LEVELS, MC, QUICK, TASKS
from harness.run import run
from harness.serialize import load_json
from inverse.parameters import EXACT, SAMPLED
from smallball.forms import FORMS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lo", description="Exact Littlewood-Offord experiments"
    )
    subparsers = parser.add_subparsers(dest="command", help="Commands")
    commands = {
        "rho": "Small-ball probability of a form",
        "construct": "Build a planted structured instance",
        "decouple": "Check the decoupling inequality",
        "inverse-linear": "Fit a GAP to a set of points",
        "inverse-bilinear": "Structure certificate for a bilinear form",
        "inverse-quadratic": "Structure certificate for a quadratic form",
        "verify": "Verify a structure certificate",
        "accept": "Run the acceptance suite",
    }
    parsers = {
        name: subparsers.add_parser(name, help=text) for name, text in commands.items()
    }

    for name, sub in parsers.items():
        sub.add_argument("--config", type=str, help="Experiment config JSON file")
        sub.add_argument("--output", type=str, help="Where to write the run report")
        sub.add_argument("--seed", type=int, default=0, help="Random seed")
        sub.add_argument(
            "--budget", type=int, default=DEFAULT_BUDGET, help="Enumeration budget"
        )
        sub.add_argument("--log", action="store_true", help="Print progress details")
        if name == "accept":
            continue
        sub.add_argument("--beta", type=str, default=DEFAULT_BETA, help="Radius beta")
        sub.add_argument(
            "--dist",
            type=str,
            default="lazy-sym-bernoulli" if name == "verify" else "bernoulli",
            help="bernoulli, lazy:MU, lazy-sym-bernoulli or a JSON file",
        )

    rho = parsers["rho"]
    rho.add_argument("--form", choices=FORMS, help="Form, else the file's or linear")
    rho.add_argument("--matrix", type=str, help="Coefficients JSON file")
    rho.add_argument("--mode", choices=[EXACT, MC], default=EXACT)
    rho.add_argument("--center", type=str, help="sup, or comma separated a0,a1,...")
    rho.add_argument("--samples", type=int, help="Monte-Carlo samples")

    construct = parsers["construct"]
    construct.add_argument("--kind", choices=list(KIND_NAMES), help="Instance kind")
    construct.add_argument("--params", type=str, help="Instance parameters JSON")
    construct.add_argument("--out", type=str, help="Where to write the instance")
    construct.add_argument("--n", type=int, help="Number of variables")
    construct.add_argument("--delta", type=str, help="Perturbation size")
    construct.add_argument("--gap", type=str, help="Planted GAP JSON file")
    construct.add_argument("--k", type=str, help="Comma separated integers k_i")
    construct.add_argument("--b", type=str, help="Comma separated rationals b_i")

    decouple = parsers["decouple"]
    decouple.add_argument("--matrix", type=str, help="Matrix JSON file")
    decouple.add_argument("--subset", type=str, help="Bitset of U, else every U")
    decouple.add_argument("--clog", type=str, default="1", help="Constant c_log")

    linear = parsers["inverse-linear"]
    linear.add_argument("--points", type=str, help="Points JSON file")

    for name in ("inverse-linear", "inverse-bilinear", "inverse-quadratic"):
        parsers[name].add_argument("--params", type=str, help="Fit parameters JSON")

    bilinear = parsers["inverse-bilinear"]
    bilinear.add_argument("--matrix", type=str, help="Matrix JSON file")
    bilinear.add_argument("--mode", choices=[EXACT, SAMPLED], default=EXACT)
    bilinear.add_argument("--count", type=int, help="Sampled y vectors")

    quadratic = parsers["inverse-quadratic"]
    quadratic.add_argument("--matrix", type=str, help="Symmetric matrix JSON file")
    quadratic.add_argument(
        "--subsets", type=str, help="exhaustive or sample:COUNT, else chosen from n"
    )
    quadratic.add_argument("--y-mode", choices=[EXACT, SAMPLED], default=EXACT)

    verify = parsers["verify"]
    verify.add_argument("--matrix", type=str, help="Matrix JSON file")
    verify.add_argument("--cert", type=str, help="Certificate JSON file")

    parsers["accept"].add_argument("--level", choices=LEVELS, default=QUICK)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """The config file when given, else a config assembled from the flags."""
    if args.config:
        return load_config(args.config)

    flags = vars(args)
    inputs = {
        name: flags[name]
        for name in ("gap", "matrix", "points", "cert")
        if flags.get(name)
    }
    options = dict()
    for name in (
        "form",
        "mode",
        "center",
        "samples",
        "kind",
        "n",
        "delta",
        "out",
        "subset",
        "count",
        "subsets",
    ):
        if flags.get(name) is not None:
            options[name] = flags[name]
    if flags.get("k"):
        try:
            options["k"] = [int(v) for v in args.k.split(",")]
        except ValueError as e:
            raise ConfigInvalid(f"Not a list of integers: {args.k!r}") from e
    if flags.get("b"):
        options["b"] = args.b.split(",")
    if args.command == "decouple":
        options["c_log"] = args.clog
    if args.command == "inverse-quadratic":
        options["y_mode"] = args.y_mode
    if args.command == "accept":
        options["level"] = args.level

    dist = flags.get("dist", "bernoulli")
    if dist.endswith(".json"):
        dist = load_json(dist)
    return ExperimentConfig(
        task=args.command,
        inputs=inputs,
        dist=dist,
        beta=flags.get("beta", DEFAULT_BETA),
        parameters=load_json(args.params) if flags.get("params") else {},
        options=options,
        seed=args.seed,
        budget=args.budget,
        output=args.output,
    )


def main():
    sys.stdout.reconfigure(encoding="utf-8")
    warnings.filterwarnings("once", category=UserWarning)

    parser = build_parser()
    args = parser.parse_args()
    if args.command not in TASKS:
        parser.print_help()
        return

    try:
        config = config_from_args(args)
    except LittlewoodOffordError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        sys.exit(e.exit_code)

    report = run(config, log=args.log)
    if report.error is not None:
        print(f"{report.error['class']}: {report.error['message']}", file=sys.stderr)
        sys.exit(report.exit_code)
    if config.output is None:
        print(report.payload_json())
    if config.task == "accept" and not report.payload["passed"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
