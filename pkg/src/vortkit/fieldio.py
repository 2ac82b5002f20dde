"""Deterministic writers for the three output formats.

Volume fields go to a legacy structured-points ASCII file (header:
dimensions, origin, spacing; then one point-data record per line in
row-major z-fastest order).  Line probes go to csv with columns s, x,
y, z, value (three value columns for vector fields).  Reports go to
json with sorted keys.  All floats are printed with 17 significant
digits and all files end lines with LF, so identical data produces
identical bytes on every platform; see docs/field-file-format.md.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .fieldgrid import PERIODIC, ScalarField, VectorField


def format_float(v: float) -> str:
    """Shortest 17-significant-digit decimal form, round-trip exact."""
    return format(float(v), ".17g")


def write_field_file(path, name: str, fld, title: str) -> None:
    """Write one scalar or vector field as structured points.

    The record section is ``SCALARS <name> double 1`` with one value
    per line, or ``VECTORS <name> double`` with three values per line;
    points run z-fastest.
    """
    if not isinstance(fld, (ScalarField, VectorField)):
        raise TypeError(f"cannot write a {type(fld).__name__} as structured points")
    g = fld.grid
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS {} {} {}".format(*g.dims),
        "ORIGIN " + " ".join(format_float(o) for o in g.origin),
        "SPACING " + " ".join(format_float(s) for s in g.spacing),
        f"POINT_DATA {g.npoints}",
    ]
    if isinstance(fld, ScalarField):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(format_float(v) for v in fld.values.ravel())
    elif isinstance(fld, VectorField):
        lines.append(f"VECTORS {name} double")
        flat = fld.values.reshape(-1, 3)
        lines.extend(
            f"{format_float(row[0])} {format_float(row[1])} {format_float(row[2])}"
            for row in flat
        )
    else:
        raise TypeError(f"cannot write a {type(fld).__name__} as structured points")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))


def trilinear_sample(fld, points) -> np.ndarray:
    """Sample a field at arbitrary coordinates.

    Periodic grids wrap; closed boxes clamp to the hull.  Exact for
    fields linear in each coordinate.
    """
    g = fld.grid
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    vals = fld.values
    vector = isinstance(fld, VectorField)
    corners = []
    weights = []
    for ax in range(3):
        n = g.dims[ax]
        f = (pts[:, ax] - g.origin[ax]) / g.spacing[ax]
        if g.boundary == PERIODIC:
            f = np.mod(f, n)
            i0 = np.floor(f).astype(np.intp) % n
            i1 = (i0 + 1) % n
            t = f - np.floor(f)
        else:
            f = np.clip(f, 0.0, n - 1.0)
            i0 = np.minimum(f.astype(np.intp), n - 2)
            i1 = i0 + 1
            t = f - i0
        corners.append((i0, i1))
        weights.append(t)
    shape = (pts.shape[0], 3) if vector else (pts.shape[0],)
    out = np.zeros(shape)
    for dx in (0, 1):
        wx = weights[0] if dx else 1.0 - weights[0]
        for dy in (0, 1):
            wy = weights[1] if dy else 1.0 - weights[1]
            for dz in (0, 1):
                wz = weights[2] if dz else 1.0 - weights[2]
                w = wx * wy * wz
                c = vals[corners[0][dx], corners[1][dy], corners[2][dz]]
                out += (w[:, None] * c) if vector else (w * c)
    return out


def write_probe_csv(path, fld, start, end, samples: int) -> None:
    """Sample a straight segment and write one row per sample point."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    t = np.linspace(0.0, 1.0, samples)
    pts = start[None, :] + t[:, None] * (end - start)[None, :]
    s = t * float(np.linalg.norm(end - start))
    values = trilinear_sample(fld, pts)
    vector = isinstance(fld, VectorField)
    header = "s,x,y,z," + ("value_x,value_y,value_z" if vector else "value")
    rows = [header]
    for i in range(samples):
        cells = [format_float(s[i])] + [format_float(c) for c in pts[i]]
        if vector:
            cells.extend(format_float(c) for c in values[i])
        else:
            cells.append(format_float(values[i]))
        rows.append(",".join(cells))
    with open(path, "wb") as fh:
        fh.write(("\n".join(rows) + "\n").encode("ascii"))


def json_ready(obj):
    """Recursively convert a report to plain json types.

    Numpy scalars become python numbers, tuples become lists, and
    non-finite floats become null (json has no spelling for them).
    """
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_report_json(path, report: dict) -> None:
    text = json.dumps(json_ready(report), indent=2, sort_keys=True)
    with open(path, "wb") as fh:
        fh.write((text + "\n").encode("utf-8"))


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
