"""Command-line entry point.

Subcommands: capacity-sweep, ber-waterfall, pragmatic-e2e, shape-demo.
Exit codes: 0 success, 2 configuration error, 3 numerical blow-up.
"""

import argparse
import sys

from .config import ConfigError, load_config
from .ssfm import NumericalBlowupError


def _add_common(sp):
    sp.add_argument("--config", default=None, help="experiment config file")
    sp.add_argument("--seed", type=int, default=1, help="master seed (u64)")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--scale", choices=("desk", "paper"), default="desk")
    sp.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fibercm",
        description="Coherent fiber link simulator and staircase-coded "
        "pragmatic modulation experiments",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("capacity-sweep", "spectral efficiency vs launch power (BP/EQ)"),
        ("ber-waterfall", "staircase code BSC waterfall points"),
        ("pragmatic-e2e", "full coded-modulation chain at reduced scale"),
        ("shape-demo", "trellis shaping energy reduction demo"),
    ):
        _add_common(sub.add_parser(name, help=desc))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, scale=args.scale)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if args.scale == "paper":
        print(
            "warning: paper scale selected; runs may take hours", file=sys.stderr
        )
    from . import harness

    try:
        if args.command == "capacity-sweep":
            path = harness.run_capacity_sweep(
                cfg, args.seed, args.out, workers=args.workers
            )
        elif args.command == "ber-waterfall":
            path = harness.run_ber_waterfall(
                cfg, args.seed, args.out, workers=args.workers
            )
        elif args.command == "pragmatic-e2e":
            path = harness.run_pragmatic_endtoend(
                cfg, args.seed, args.out, workers=args.workers
            )
        else:
            path = harness.run_shape_demo(cfg, args.seed, args.out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except NumericalBlowupError as e:
        print(f"numerical blow-up: {e}", file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
