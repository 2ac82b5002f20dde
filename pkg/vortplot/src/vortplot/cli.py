"""Console entry points: plot-field and plot-report.

Exit codes: 0 on success, 2 on any input problem (missing file, bad
flag value, file that does not parse, index off the grid).
"""

from __future__ import annotations

import argparse
import sys

from .loader import FieldFormatError, load_field
from .plots import ReportContentError, parse_plane, plot_slice, plot_streamlines, plot_convergence


def main_field(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-field",
        description="Render one plane of a structured-points field file to PNG.",
    )
    parser.add_argument("file", help="field file written by the simulation CLI")
    parser.add_argument(
        "--slice",
        dest="plane",
        default="z=MID",
        metavar="AXIS=INDEX",
        help="plane to draw, e.g. z=MID or y=12 (default z=MID)",
    )
    parser.add_argument(
        "--mode",
        choices=("auto", "slice", "stream"),
        default="auto",
        help="auto draws scalars as slices and vectors as streamlines",
    )
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)

    try:
        field = load_field(args.file)
        axis, index = parse_plane(args.plane, field.dims)
        stream = args.mode == "stream" or (args.mode == "auto" and field.is_vector)
        if stream:
            plot_streamlines(field, (axis, index), args.out)
        else:
            plot_slice(field, axis, index, args.out)
    except (FieldFormatError, OSError, ValueError, IndexError) as exc:
        print(f"plot-field: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


def main_report(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-report",
        description="Render the convergence history of a run report to PNG.",
    )
    parser.add_argument("report", help="json report written by the simulation CLI")
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)

    try:
        plot_convergence(args.report, args.out)
    except (ReportContentError, OSError, ValueError) as exc:
        print(f"plot-report: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main_field())
