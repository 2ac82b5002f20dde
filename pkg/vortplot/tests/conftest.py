"""Fixtures generated by the producer CLI.

Every input file under test is written by an actual `vortkit run` in a
temp directory, keeping the two packages coupled only through the file
formats.  The configs are spelled out literally here against the
producer's documented schema; nothing imports the producer package.
"""

from __future__ import annotations

import json
import math
import shutil
import subprocess
from pathlib import Path

import pytest

N = 16


def _periodic(scenario, physics, probe_field):
    span = 2.0 * math.pi
    h = span / N
    return {
        "schema_version": 1,
        "name": scenario,
        "scenario": scenario,
        "grid": {
            "dims": [N, N, N],
            "spacing": [h, h, h],
            "origin": [0.0, 0.0, 0.0],
            "boundary": "periodic",
        },
        "physics": physics,
        "outputs": {
            "formats": ["vtk", "csv", "json"],
            "probes": [
                {
                    "field": probe_field,
                    "start": [0.0, 0.0, 0.0],
                    "end": [span - h, span - h, span - h],
                    "samples": 17,
                }
            ],
        },
    }


def _boxed(scenario, extra):
    cfg = {
        "schema_version": 1,
        "name": scenario,
        "scenario": scenario,
        "grid": {
            "dims": [N, N, N],
            "spacing": [10.0 / (N - 1)] * 3,
            "origin": [-5.0, -5.0, -5.0],
            "boundary": "dirichlet0",
        },
        "physics": {},
        "outputs": {"formats": ["vtk", "csv", "json"]},
    }
    cfg.update(extra)
    return cfg


def _axis_probe(cfg):
    """Probe straight along z through whole-period points, so every
    sample lands on a grid node (periodic wrap makes the last exact)."""
    span = cfg["grid"]["dims"][2] * cfg["grid"]["spacing"][2]
    cfg["outputs"]["probes"] = [
        {
            "field": cfg["outputs"]["probes"][0]["field"],
            "start": [0.0, 0.0, 0.0],
            "end": [0.0, 0.0, span],
            "samples": 17,
        }
    ]
    return cfg


CONFIGS = {
    "plane_wave": _periodic("plane_wave", {"lambda_expr": "1 + rho2"}, "density"),
    "abc_flow": _axis_probe(_periodic("abc_flow", {"lambda0": 1.0}, "current")),
    "gaussian_packet": _boxed("gaussian_packet", {}),
    "selfconsistent_gas": _boxed(
        "selfconsistent_gas",
        {
            "physics": {"lambda0": 1.0},
            "potential_expr": "0.5*(x^2 + y^2 + z^2)",
        },
    ),
}


@pytest.fixture(scope="session")
def runs(tmp_path_factory) -> dict[str, Path]:
    """Map scenario name to a directory of CLI-written outputs."""
    exe = shutil.which("vortkit")
    if exe is None:
        pytest.fail("producer CLI 'vortkit' not on PATH; install it first")
    root = tmp_path_factory.mktemp("runs")
    out = {}
    for name, cfg in CONFIGS.items():
        cfg_path = root / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg))
        run_dir = root / name
        proc = subprocess.run(
            [exe, "run", str(cfg_path), "--out", str(run_dir), "--reproducible"],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            pytest.fail(f"fixture run {name} failed:\n{proc.stderr}")
        out[name] = run_dir
    return out


@pytest.fixture(scope="session")
def all_field_files(runs) -> list[Path]:
    files = sorted(p for d in runs.values() for p in d.glob("*.vtk"))
    assert files, "fixture runs produced no field files"
    return files
