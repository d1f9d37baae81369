"""Command-line interface.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import ConfigError, NumericalError
from .harness import (
    DEFAULT_SEED,
    load_scenario,
    run_fig4,
    run_fig5,
    run_fig6,
    run_scenario,
)
from .tones import PROFILES


def _add_common(sub):
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coppersim",
        description="Multi-pair DSL binder simulator (crosstalk cancellation ladder)",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--jobs", type=int, default=None)
    p_run.add_argument("--detail", action="store_true", help="emit per-tone detail CSV")

    p4 = sub.add_parser("fig4", help="per-user rate bars preset")
    _add_common(p4)
    p4.add_argument("--detail", action="store_true")
    p5 = sub.add_parser("fig5", help="average rate vs loop length preset")
    _add_common(p5)
    p6 = sub.add_parser("fig6", help="rate vs interferer power preset")
    _add_common(p6)

    sub.add_parser("profiles", help="list built-in technology profiles")

    p_val = sub.add_parser("validate", help="validate a scenario config file")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            sc = load_scenario(args.config)
            paths = run_scenario(sc, out_dir=args.out, jobs=args.jobs, detail=args.detail)
        elif args.command == "fig4":
            paths = run_fig4(args.out, seed=args.seed, jobs=args.jobs, detail=args.detail)
        elif args.command == "fig5":
            paths = run_fig5(args.out, seed=args.seed, jobs=args.jobs)
        elif args.command == "fig6":
            paths = run_fig6(args.out, seed=args.seed, jobs=args.jobs)
        elif args.command == "profiles":
            for name, plan in PROFILES.items():
                print(
                    f"{name}: {plan.num_tones} tones, spacing {plan.spacing_hz:g} Hz, "
                    f"{plan.duplexing}, band edge {plan.bandwidth_hz / 1e6:g} MHz"
                )
            return 0
        elif args.command == "validate":
            load_scenario(args.config)
            print(f"{args.config}: OK")
            return 0
        else:  # pragma: no cover
            return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for p in paths:
        print(p)
    return 0


def entry():  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry()
