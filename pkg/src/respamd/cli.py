"""Command line surface.

Subcommands:

    respamd run <scenario>      single run with the file's base nu and
                                step-size factor
    respamd sweep <scenario>    full nu x step-size-factor grid
    respamd compare <scenario>  pure two-body (nu = 0) versus two-plus-three
                                body runs, for RDF comparisons
    respamd check               built-in oracle suite on small random systems

Global flags: --output DIR, --seed S (overrides the file), --threads N.
Exit codes: 0 success, 1 validation error, 2 every grid point blew up,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from respamd.experiment import run_experiment
from respamd.model import ValidationError
from respamd.scenarios import ExperimentPlan, parse_scenario
from respamd.selfcheck import run_self_checks

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BLOWUP = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="respamd",
        description="reduced-units MD with two-body + three-body forces and r-RESPA",
    )
    parser.add_argument("--output", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run the scenario once with its base parameters"),
        ("sweep", "run the scenario's nu x step-size-factor grid"),
        ("compare", "run pure two-body vs two-plus-three-body for RDF comparison"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("scenario", help="scenario file")
    sub.add_parser("check", help="run the built-in oracle suite")
    return parser


def _plan_for_command(args) -> ExperimentPlan:
    plan = parse_scenario(args.scenario)
    if args.seed is not None:
        plan.config = plan.config.with_overrides(seed=args.seed)
    if args.command == "run":
        plan.nu_values = None
        plan.step_size_factors = None
    elif args.command == "compare":
        base_nu = plan.config.force_field.nu
        if base_nu == 0.0:
            raise ValidationError(
                "compare needs a scenario with nu > 0 to contrast against the pure two-body run"
            )
        plan.nu_values = [0.0, base_nu]
    return plan


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return EXIT_OK if run_self_checks() else EXIT_VALIDATION
        plan = _plan_for_command(args)
        result = run_experiment(plan, Path(args.output), threads=args.threads)
        for point in result.points:
            label = f"nu={point.nu} s={point.step_size_factor}"
            if point.status == "ok":
                print(f"done {label}: wall {point.wall_seconds:.3f}s -> {point.directory}")
            else:
                print(f"FAILED {label}: {point.status} -> {point.directory}")
        if result.all_blew_up:
            return EXIT_BLOWUP
        return EXIT_OK
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
