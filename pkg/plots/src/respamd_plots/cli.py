"""Command line: respamd-plots <figure-kind> --input DIR --output FILE."""

from __future__ import annotations

import argparse
import sys

from respamd_plots.figures import FIGURE_KINDS, PlotJob, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="respamd-plots",
        description="render figures from respamd experiment CSV outputs",
    )
    parser.add_argument("kind", choices=FIGURE_KINDS, help="figure kind to render")
    parser.add_argument("--input", required=True, help="experiment output directory")
    parser.add_argument("--output", required=True, help="image file to write (png/pdf/svg)")
    args = parser.parse_args(argv)
    try:
        path = render(PlotJob(input_dir=args.input, kind=args.kind, output=args.output))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
