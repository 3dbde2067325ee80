"""``thzcov`` command line entry point.

Exit codes: 0 success, 2 configuration error, 3 infeasible computation,
4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .analysis import CombinatorialBlowup
from .beamtrain import TrainingInfeasible
from .config import ConfigError, parse_config, schema_help
from .experiments import atomic_write, render_csv, render_json, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4

SUBCOMMANDS = {
    "analyze": "closed-form results only",
    "simulate": "Monte Carlo results only",
    "validate": "closed form and Monte Carlo side by side with a pass/fail column",
    "sweep": "closed form, plus Monte Carlo when sim.enabled = true",
    "beamtrain": "beam-training stage count over the N_A sweep",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzcov", description="Coverage and beam-training analysis of grid THz networks.",
        epilog=schema_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=desc, description=desc, epilog=schema_help(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="TOML config file (omit for the reference defaults)")
        p.add_argument("--out", help="output CSV path (overrides output.path)")
        p.add_argument("--seed", type=int, help="base seed (overrides sim.seed)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials (overrides sim.n_trials)")
        p.add_argument("--topology", choices=("square", "hexagonal", "ppp"),
                       help="evaluate a single topology (overrides topologies)")
        p.add_argument("--workers", type=int, help="worker processes (overrides sim.workers)")
        p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"thzcov: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    overrides = {"output.path": args.out, "sim.seed": args.seed, "sim.n_trials": args.trials,
                 "sim.workers": args.workers,
                 "topologies": [args.topology] if args.topology else None}
    if args.command == "beamtrain":
        overrides["experiment"] = "training_vs_array"
    elif args.command == "validate" and "experiment" not in text:
        overrides["experiment"] = "validate"
    try:
        cfg = parse_config(text, overrides)
        if args.command == "beamtrain" and cfg.experiment != "training_vs_array":
            raise ConfigError("experiment: beamtrain runs training_vs_array")
        analytic = args.command != "simulate"
        simulate = args.command in ("simulate", "validate") or (args.command == "sweep" and cfg.sim["enabled"])
        validate = args.command == "validate" or cfg.experiment == "validate"
        rows = run_experiment(cfg, analytic=analytic, simulate=simulate, validate=validate)
    except ConfigError as exc:
        print(f"thzcov: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingInfeasible, CombinatorialBlowup) as exc:
        print(f"thzcov: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"thzcov: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    path = cfg.output["path"]
    try:
        atomic_write(path, render_csv(rows, cfg, with_pass=validate))
        if cfg.output["format"] == "csv+json":
            atomic_write(path + ".json", render_json(rows, cfg))
    except OSError as exc:
        print(f"thzcov: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if validate:
        failed = [r for r in rows if r.passed is False]
        print(f"thzcov: {len(rows) - len(failed)}/{len(rows)} rows within tolerance", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
