"""Command-line front end.

``run`` executes a scenario configuration and writes the requested
outputs; ``validate`` checks a configuration without computing;
``version`` prints the package version.  Exit codes: 0 success, 2
validation or configuration error (every problem is listed, not just
the first), 3 solver failure (the report is still written, with the
failure details inside).

The output directory resolves in order: ``--out``, the VORTKIT_OUT
environment variable, the config's ``outputs.directory``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .errors import VortkitError
from .fieldio import sha256_of, write_field_file, write_probe_csv, write_report_json
from .scenarios import parse_config, run_scenario, with_grid_dims

ENV_OUT = "VORTKIT_OUT"


def _grid_override(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid expects an integer, got {text!r}")
    if n < 8:
        raise argparse.ArgumentTypeError("--grid must be >= 8")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortkit",
        description="Scenario runner for quantum-fluid vorticity control diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario config and write outputs")
    p_run.add_argument("config", help="path to a json configuration document")
    p_run.add_argument("--out", help="output directory (overrides config and environment)")
    p_run.add_argument(
        "--reproducible",
        action="store_true",
        help="suppress timestamps and wall times so outputs are byte-stable",
    )
    p_run.add_argument(
        "--grid",
        type=_grid_override,
        metavar="N",
        help="override resolution to N^3, preserving the physical box",
    )
    p_val = sub.add_parser("validate", help="check a config without computing")
    p_val.add_argument("config", help="path to a json configuration document")
    sub.add_parser("version", help="print the package version")
    return parser


def _load_document(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh), None
    except OSError as err:
        return None, f"cannot read {path}: {err}"
    except UnicodeDecodeError as err:
        return None, f"{path} is not valid UTF-8: {err}"
    except json.JSONDecodeError as err:
        return None, f"{path} is not valid json: {err}"


def _print_problems(problems) -> None:
    for p in problems:
        print(f"error: {p}", file=sys.stderr)


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _cmd_validate(args) -> int:
    doc, err = _load_document(args.config)
    if err is not None:
        print(f"error: {err}", file=sys.stderr)
        return 2
    _, problems = parse_config(doc)
    if problems:
        _print_problems(problems)
        print(f"invalid: {len(problems)} problem(s)", file=sys.stderr)
        return 2
    print("ok")
    return 0


def _cmd_run(args) -> int:
    doc, err = _load_document(args.config)
    if err is not None:
        print(f"error: {err}", file=sys.stderr)
        return 2
    cfg, problems = parse_config(doc)
    if problems:
        _print_problems(problems)
        return 2
    if args.grid is not None:
        try:
            cfg = with_grid_dims(cfg, args.grid)
        except (VortkitError, ValueError) as e:
            print(f"error: --grid {args.grid}: {e}", file=sys.stderr)
            return 2

    out_dir = args.out or os.environ.get(ENV_OUT) or cfg.outputs.directory
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        print(f"error: cannot create output directory {out_dir}: {e}", file=sys.stderr)
        return 2
    if not os.access(out_dir, os.W_OK):
        print(f"error: output directory {out_dir} is not writable", file=sys.stderr)
        return 2

    try:
        result = run_scenario(cfg, reproducible=args.reproducible)
    except VortkitError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2

    for st in result.report["stages"]:
        print(f"stage {st['name']:<18} {st['seconds']:9.3f}s")

    formats = cfg.outputs.formats
    manifest = []

    def _record(path, name):
        manifest.append(
            {"path": name, "bytes": os.path.getsize(path), "sha256": sha256_of(path)}
        )

    try:
        if "vtk" in formats:
            for fname, fld in result.fields.items():
                name = f"{cfg.name}_{fname}.vtk"
                title = f"{cfg.name} {fname}"
                if not args.reproducible:
                    title += f" written {_timestamp()}"
                path = os.path.join(out_dir, name)
                write_field_file(path, fname, fld, title)
                _record(path, name)
        if "csv" in formats:
            for i, probe in enumerate(cfg.outputs.probes):
                if probe.field not in result.fields:
                    print(
                        f"warning: probe field {probe.field!r} was not produced by "
                        f"this run; probe {i} skipped",
                        file=sys.stderr,
                    )
                    continue
                name = f"{cfg.name}_probe{i:02d}.csv"
                path = os.path.join(out_dir, name)
                write_probe_csv(path, result.fields[probe.field], probe.start, probe.end, probe.samples)
                _record(path, name)
        # the report lists every other file; it cannot hash itself
        result.report["files"] = manifest
        if "json" in formats:
            name = f"{cfg.name}_report.json"
            path = os.path.join(out_dir, name)
            write_report_json(path, result.report)
            print(f"report: {path}")
    except OSError as e:
        print(f"error: cannot write outputs to {out_dir}: {e}", file=sys.stderr)
        return 2

    if result.failure is not None:
        print(f"solver failure: {result.failure}", file=sys.stderr)
        return 3
    total = len(manifest) + (1 if "json" in formats else 0)
    print(f"wrote {total} file(s) to {out_dir}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(f"vortkit {__version__}")
        return 0
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
