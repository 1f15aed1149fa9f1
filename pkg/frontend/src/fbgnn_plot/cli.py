"""Command line: fbgnn-plot --csv results.csv --group decoder,schedule --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .render import CurveSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fbgnn-plot", description=__doc__)
    parser.add_argument("--csv", action="append", required=True,
                        help="results CSV (repeatable)")
    parser.add_argument("--group", default="decoder,schedule",
                        help="comma-separated grouping columns")
    parser.add_argument("--out", default="fig.png")
    parser.add_argument("--xlim", help="xmin,xmax")
    parser.add_argument("--ylim", help="ymin,ymax")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)

    def limits(text):
        if not text:
            return None
        try:
            lo, hi = (float(t) for t in text.split(","))
        except ValueError:
            parser.error("bad limits %r" % text)
        return (lo, hi)

    spec = CurveSpec(
        csv_paths=args.csv,
        group_keys=tuple(k for k in args.group.split(",") if k),
        out_path=args.out,
        x_limits=limits(args.xlim),
        y_limits=limits(args.ylim),
        title=args.title,
    )
    try:
        render(spec)
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print("wrote %s and %s.json" % (args.out, args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
