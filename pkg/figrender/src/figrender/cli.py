"""figrender render --kind {capacity|waterfall} --in CSV... --out FIG"""

import argparse
import sys

from .io import CsvFormatError, dump_tables, read_tables
from .plots import render_capacity, render_waterfall

_KIND_SCHEMAS = {
    "capacity": {"capacity.v1", "pragmatic.v1"},
    "waterfall": {"waterfall.v1"},
}


def build_parser():
    ap = argparse.ArgumentParser(prog="figrender")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render one figure from experiment CSVs")
    r.add_argument("--kind", choices=("capacity", "waterfall"), required=True)
    r.add_argument("--in", dest="inputs", nargs="+", required=True,
                   metavar="CSV")
    r.add_argument("--out", required=True, help="output image (.png or .svg)")
    r.add_argument(
        "--dump-table", default=None, metavar="CSV",
        help="also re-emit exactly the rows plotted, verbatim",
    )
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tables = read_tables(args.inputs, _KIND_SCHEMAS[args.kind])
        if args.kind == "capacity":
            render_capacity(tables, args.out)
        else:
            render_waterfall(tables, args.out)
        if args.dump_table:
            dump_tables(tables, args.dump_table)
    except (CsvFormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
