"""Static figures from loaded fields and run reports.

Three renderers: a plane slice of one field, in-plane streamlines of a
vector field, and the residual-vs-iteration curve a self-consistent
run records in its report.  Every function writes a PNG and returns
the data it drew, so callers can assert on exactly what was plotted.
"""

from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .loader import LoadedField

_AXES = {"x": 0, "y": 1, "z": 2}
# display floor for exact zeros on the log axis
_LOG_FLOOR = 1e-16


class ReportContentError(ValueError):
    """A report file lacks the data a plot needs."""


def _axis_index(axis) -> int:
    if isinstance(axis, str) and axis.lower() in _AXES:
        return _AXES[axis.lower()]
    if axis in (0, 1, 2):
        return int(axis)
    raise ValueError(f"axis must be one of x, y, z (or 0, 1, 2), got {axis!r}")


def parse_plane(spec, dims) -> tuple[int, int]:
    """Turn 'z=MID' / 'y=12' / ('z', 8) into (axis index, point index).

    MID means the middle point of that axis.  An index outside the grid
    raises IndexError, like the plot functions themselves.
    """
    if isinstance(spec, (tuple, list)) and len(spec) == 2:
        axis, index = _axis_index(spec[0]), int(spec[1])
    elif isinstance(spec, str) and spec.count("=") == 1:
        name, _, value = spec.partition("=")
        axis = _axis_index(name.strip())
        value = value.strip()
        if value.upper() == "MID":
            index = dims[axis] // 2
        else:
            try:
                index = int(value)
            except ValueError:
                raise ValueError(f"slice index must be an integer or MID, got {value!r}") from None
    else:
        raise ValueError(f"plane must look like 'z=MID' or ('z', 8), got {spec!r}")
    if not 0 <= index < dims[axis]:
        raise IndexError(
            f"slice index {index} out of range for axis {'xyz'[axis]} with {dims[axis]} points"
        )
    return axis, index


def _plane_axes(axis: int) -> tuple[int, int]:
    """In-plane axes (horizontal, vertical) for a slice normal to axis."""
    return {0: (1, 2), 1: (0, 2), 2: (0, 1)}[axis]


def plot_slice(field: LoadedField, axis, index: int, out_png) -> np.ndarray:
    """Draw one plane of a field and return the 2D array that was drawn.

    Vector fields are shown as their in-plane magnitude.  The index is
    checked against the field dims first; out of range raises
    IndexError before anything is rendered.
    """
    ax_n = _axis_index(axis)
    if not 0 <= index < field.dims[ax_n]:
        raise IndexError(
            f"slice index {index} out of range for axis {'xyz'[ax_n]} "
            f"with {field.dims[ax_n]} points"
        )
    plane = np.take(field.values, index, axis=ax_n)
    if field.is_vector:
        plane = np.linalg.norm(plane, axis=-1)
    h, v = _plane_axes(ax_n)
    hc, vc = field.axis_coords(h), field.axis_coords(v)

    fig, axes = plt.subplots(figsize=(6.0, 5.0))
    # plane is indexed [i_h, i_v]; imshow wants rows = vertical
    im = axes.imshow(
        plane.T,
        origin="lower",
        extent=(hc[0], hc[-1], vc[0], vc[-1]),
        aspect="equal",
        cmap="viridis",
    )
    fig.colorbar(im, ax=axes)
    coord = field.origin[ax_n] + field.spacing[ax_n] * index
    axes.set_xlabel("xyz"[h])
    axes.set_ylabel("xyz"[v])
    axes.set_title(f"slice {'xyz'[ax_n]} = {coord:.6g} (index {index})")
    fig.savefig(out_png, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return plane


def plot_streamlines(vfield: LoadedField, plane, out_png) -> int:
    """Draw in-plane streamlines on one plane of a vector field.

    Returns the number of line segments drawn (zero for an identically
    zero plane), with the in-plane magnitude as the background.
    """
    if not vfield.is_vector:
        raise ValueError("streamlines need a vector field; this file holds a scalar")
    ax_n, index = parse_plane(plane, vfield.dims)
    h, v = _plane_axes(ax_n)
    sl = np.take(vfield.values, index, axis=ax_n)
    u, w = sl[..., h], sl[..., v]
    hc, vc = vfield.axis_coords(h), vfield.axis_coords(v)

    fig, axes = plt.subplots(figsize=(6.0, 5.0))
    mag = np.hypot(u, w)
    axes.imshow(
        mag.T,
        origin="lower",
        extent=(hc[0], hc[-1], vc[0], vc[-1]),
        aspect="equal",
        cmap="magma",
        alpha=0.35,
    )
    # streamplot wants row-major (vertical, horizontal) arrays
    stream = axes.streamplot(hc, vc, u.T, w.T, density=1.2, color="tab:blue", linewidth=0.9)
    segments = len(stream.lines.get_segments())
    coord = vfield.origin[ax_n] + vfield.spacing[ax_n] * index
    axes.set_xlabel("xyz"[h])
    axes.set_ylabel("xyz"[v])
    axes.set_title(f"streamlines on {'xyz'[ax_n]} = {coord:.6g} (index {index})")
    axes.set_xlim(hc[0], hc[-1])
    axes.set_ylim(vc[0], vc[-1])
    fig.savefig(out_png, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return segments


def plot_convergence(report_json, out_png) -> dict:
    """Render the per-sweep convergence history from a run report.

    Reads the report written by the simulation CLI, draws the step
    deltas on a log axis next to the final certificate residuals, and
    returns the raw series exactly as found in the report (nulls kept
    as None, zeros kept as zeros).
    """
    with open(report_json, "rb") as fh:
        report = json.load(fh)
    try:
        block = report["residuals"]["selfconsistent"]
        history = block["step_history"]
    except (KeyError, TypeError):
        raise ReportContentError(
            "report has no self-consistent convergence history "
            "(residuals.selfconsistent.step_history missing)"
        ) from None
    if not history:
        raise ReportContentError("convergence history is empty")

    delta_a = [step.get("delta_A") for step in history]
    delta_e = [step.get("delta_E") for step in history]
    final = dict(block.get("final_residuals", {}))
    sweeps = np.arange(1, len(history) + 1)

    def floored(series):
        # nulls (undefined first step) are skipped, exact zeros pinned
        xs = [s for s, y in zip(sweeps, series) if y is not None]
        ys = [max(y, _LOG_FLOOR) for y in series if y is not None]
        return xs, ys

    fig, (left, right) = plt.subplots(
        1, 2, figsize=(9.0, 4.0), gridspec_kw={"width_ratios": (3, 2)}
    )
    for label, series, marker in (("delta A", delta_a, "o"), ("delta E", delta_e, "s")):
        xs, ys = floored(series)
        if xs:
            left.semilogy(xs, ys, marker=marker, label=label)
    left.axhline(_LOG_FLOOR, color="gray", linestyle=":", linewidth=0.8)
    left.set_xlabel("sweep")
    left.set_ylabel(f"step delta (floor {_LOG_FLOOR:g} marks exact zeros)")
    left.set_xticks(sweeps)
    left.legend()
    left.set_title(f"converged in {block.get('iterations', len(history))} sweep(s)")

    if final:
        names = sorted(final)
        vals = [max(final[k], _LOG_FLOOR) for k in names]
        right.barh(range(len(names)), vals, color="tab:green")
        right.set_xscale("log")
        right.set_yticks(range(len(names)), names)
        right.set_xlabel("final residual")
        right.set_title("certificates")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return {"delta_A": delta_a, "delta_E": delta_e, "final_residuals": final}
