"""Reader for the structured-points field files the simulation CLI emits.

The layout is fixed (see the producer's docs/field-file-format.md): a
signature line, a free title, ASCII, DATASET STRUCTURED_POINTS, then
DIMENSIONS / ORIGIN / SPACING / POINT_DATA, one record declaration
(SCALARS plus LOOKUP_TABLE, or VECTORS), and one data line per grid
point in row-major z-fastest order.  Floats are written with shortest
round-trip precision, so parsing with standard decimal conversion
recovers them exactly.

This package is a read-only consumer; it never recomputes physics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FieldFormatError(ValueError):
    """A field file deviates from the documented layout."""


def _fail(lineno: int, why: str):
    raise FieldFormatError(f"line {lineno}: {why}")


@dataclass(frozen=True)
class LoadedField:
    """One volume field exactly as read from disk.

    values has shape dims for a scalar record and dims + (3,) for a
    vector record; the point count always equals the dims product.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    values: np.ndarray

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 4

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.dims[axis])


def _triple(lineno: int, line: str, keyword: str, kind):
    parts = line.split()
    if len(parts) != 4 or parts[0] != keyword:
        _fail(lineno, f"expected '{keyword} <3 values>', got {line!r}")
    try:
        return tuple(kind(p) for p in parts[1:])
    except ValueError:
        _fail(lineno, f"non-numeric {keyword} entry in {line!r}")


def load_field(path) -> LoadedField:
    """Parse one field file, byte-faithfully.

    Malformed headers raise FieldFormatError naming the offending line;
    a short or long data section raises one naming the expected and
    found point counts.  Scalar vs vector is detected from the record
    declaration.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise FieldFormatError(f"not an ASCII field file: {exc}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    if len(lines) < 10:
        raise FieldFormatError(
            f"file ends after {len(lines)} line(s); the header alone is 9 or 10"
        )
    if not lines[0].startswith("# vtk DataFile"):
        _fail(1, f"expected a '# vtk DataFile' signature, got {lines[0]!r}")
    # lines[1] is the free-form title
    if lines[2] != "ASCII":
        _fail(3, f"expected 'ASCII', got {lines[2]!r}")
    if lines[3] != "DATASET STRUCTURED_POINTS":
        _fail(4, f"expected 'DATASET STRUCTURED_POINTS', got {lines[3]!r}")

    dims = _triple(5, lines[4], "DIMENSIONS", int)
    if any(d < 1 for d in dims):
        _fail(5, f"dimensions must be positive, got {dims}")
    origin = _triple(6, lines[5], "ORIGIN", float)
    spacing = _triple(7, lines[6], "SPACING", float)
    if any(s <= 0 for s in spacing):
        _fail(7, f"spacing must be positive, got {spacing}")

    parts = lines[7].split()
    if len(parts) != 2 or parts[0] != "POINT_DATA" or not parts[1].isdigit():
        _fail(8, f"expected 'POINT_DATA <count>', got {lines[7]!r}")
    npoints = int(parts[1])
    product = dims[0] * dims[1] * dims[2]
    if npoints != product:
        _fail(8, f"POINT_DATA {npoints} does not match DIMENSIONS product {product}")

    record = lines[8].split()
    if record and record[0] == "SCALARS":
        if len(record) != 4 or record[3] != "1":
            _fail(9, f"expected 'SCALARS <name> <type> 1', got {lines[8]!r}")
        if lines[9] != "LOOKUP_TABLE default":
            _fail(10, f"expected 'LOOKUP_TABLE default', got {lines[9]!r}")
        comps, data_start = 1, 10
    elif record and record[0] == "VECTORS":
        if len(record) != 3:
            _fail(9, f"expected 'VECTORS <name> <type>', got {lines[8]!r}")
        comps, data_start = 3, 9
    else:
        _fail(9, f"expected a SCALARS or VECTORS record, got {lines[8]!r}")

    data_lines = lines[data_start:]
    if len(data_lines) != npoints:
        raise FieldFormatError(
            f"expected {npoints} data point(s), found {len(data_lines)}"
        )

    flat = np.empty(npoints * comps, dtype=np.float64)
    for i, line in enumerate(data_lines):
        tokens = line.split()
        if len(tokens) != comps:
            _fail(
                data_start + i + 1,
                f"expected {comps} component(s) per point, got {len(tokens)}",
            )
        try:
            for j, tok in enumerate(tokens):
                flat[i * comps + j] = float(tok)
        except ValueError:
            _fail(data_start + i + 1, f"not a number: {tok!r}")

    shape = dims if comps == 1 else dims + (3,)
    return LoadedField(dims, spacing, origin, flat.reshape(shape))
