"""Structured 3D grid, field containers, and finite-difference operators.

Everything downstream (hydrodynamic observables, control-field
construction, the coupled solvers, containment diagnostics) runs on the
uniform collocated grid defined here.  All differential operators are
second-order central differences; the boundary treatment is selected per
grid: periodic wrap-around, or one-sided second-order stencils at the
edges of a Dirichlet box.

Fields are immutable after construction (the value arrays are marked
read-only) and every operator is a pure function, so results can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridBudgetExceeded, GridMismatch, InvalidField

PERIODIC = "periodic"
DIRICHLET0 = "dirichlet0"

#: Default ceiling on grid points (a 256^3 box); guards against typo'd dims
#: allocating tens of GB.
DEFAULT_MAX_POINTS = 2**24


@dataclass(frozen=True)
class Grid:
    """Uniform structured lattice.

    Parameters
    ----------
    dims : tuple of 3 int
        Points along each axis; each must be >= 8 so the second-order
        stencils have room.
    spacing : tuple of 3 float
        Grid step per axis (natural-unit length), all > 0.
    origin : tuple of 3 float
        Coordinates of the (0, 0, 0) grid point.
    boundary : str
        ``"periodic"`` or ``"dirichlet0"``.
    max_points : int
        Memory budget check: dims[0]*dims[1]*dims[2] must not exceed it.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    boundary: str = PERIODIC
    max_points: int = field(default=DEFAULT_MAX_POINTS, repr=False)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        spacing = tuple(float(s) for s in self.spacing)
        origin = tuple(float(o) for o in self.origin)
        if len(dims) != 3 or len(spacing) != 3 or len(origin) != 3:
            raise ValueError("dims, spacing and origin must each have 3 entries")
        if any(n < 8 for n in dims):
            raise ValueError(f"all dims must be >= 8, got {dims}")
        if any(not np.isfinite(s) or s <= 0.0 for s in spacing):
            raise ValueError(f"all spacing entries must be positive, got {spacing}")
        if any(not np.isfinite(o) for o in origin):
            raise ValueError(f"origin must be finite, got {origin}")
        if self.boundary not in (PERIODIC, DIRICHLET0):
            raise ValueError(f"boundary must be {PERIODIC!r} or {DIRICHLET0!r}, got {self.boundary!r}")
        npts = dims[0] * dims[1] * dims[2]
        if npts > self.max_points:
            raise GridBudgetExceeded(f"{dims} has {npts} points, exceeding the budget of {self.max_points}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.dims

    @property
    def npoints(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def cell_volume(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz

    def axis(self, i: int) -> np.ndarray:
        """1D coordinate array along axis ``i``."""
        return self.origin[i] + self.spacing[i] * np.arange(self.dims[i])

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Full (nx, ny, nz) coordinate arrays X, Y, Z (ij indexing)."""
        return tuple(np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij"))

    def extent(self, i: int) -> float:
        """Length of the box along axis ``i`` (periodic: one full period)."""
        n = self.dims[i] if self.boundary == PERIODIC else self.dims[i] - 1
        return n * self.spacing[i]


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(values)
    out.flags.writeable = False
    return out


def _check_values(grid: Grid, values: np.ndarray, expected_shape, dtype, kind: str) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != expected_shape:
        raise InvalidField(f"{kind} values must have shape {expected_shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.count_nonzero(~np.isfinite(arr)))
        raise InvalidField(f"{kind} contains {bad} non-finite values")
    return _freeze(arr)


@dataclass(frozen=True)
class ScalarField:
    """Real scalar per grid point, shape (nx, ny, nz)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.grid, self.values, self.grid.shape, np.float64, "ScalarField")
        )

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))


@dataclass(frozen=True)
class VectorField:
    """Real 3-vector per grid point, shape (nx, ny, nz, 3)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.grid, self.values, self.grid.shape + (3,), np.float64, "VectorField")
        )

    @classmethod
    def from_components(cls, grid: Grid, vx, vy, vz) -> "VectorField":
        comps = [np.broadcast_to(np.asarray(c, dtype=np.float64), grid.shape) for c in (vx, vy, vz)]
        return cls(grid, np.stack(comps, axis=-1))

    @classmethod
    def uniform(cls, grid: Grid, vec) -> "VectorField":
        v = np.asarray(vec, dtype=np.float64)
        return cls(grid, np.broadcast_to(v, grid.shape + (3,)).copy())

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=-1))


@dataclass(frozen=True)
class ComplexField:
    """Complex scalar per grid point, shape (nx, ny, nz)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _check_values(self.grid, self.values, self.grid.shape, np.complex128, "ComplexField")
        )


@dataclass(frozen=True)
class Matrix3Field:
    """Real 3x3 matrix per grid point, shape (nx, ny, nz, 3, 3)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self,
            "values",
            _check_values(self.grid, self.values, self.grid.shape + (3, 3), np.float64, "Matrix3Field"),
        )


def require_same_grid(*fields) -> Grid:
    """Return the shared grid, raising GridMismatch when they differ."""
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatch(f"fields live on different grids: {grid} vs {f.grid}")
    return grid


# ---------------------------------------------------------------------------
# difference stencils
# ---------------------------------------------------------------------------


def _diff1(arr: np.ndarray, axis: int, h: float, boundary: str) -> np.ndarray:
    """Second-order first derivative along ``axis``.

    Periodic: central difference with wrap-around.  Dirichlet box:
    central in the interior, one-sided second-order 3-point stencils at
    the two edge planes.
    """
    if boundary == PERIODIC:
        return (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2.0 * h)
    out = np.empty_like(arr)
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim

    def sl(i):
        s = [slice(None)] * arr.ndim
        s[axis] = i
        return tuple(s)

    lo[axis] = slice(2, None)
    hi[axis] = slice(None, -2)
    mid = [slice(None)] * arr.ndim
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (arr[tuple(lo)] - arr[tuple(hi)]) / (2.0 * h)
    out[sl(0)] = (-3.0 * arr[sl(0)] + 4.0 * arr[sl(1)] - arr[sl(2)]) / (2.0 * h)
    out[sl(-1)] = (3.0 * arr[sl(-1)] - 4.0 * arr[sl(-2)] + arr[sl(-3)]) / (2.0 * h)
    return out


def _diff2(arr: np.ndarray, axis: int, h: float, boundary: str) -> np.ndarray:
    """Second-order second derivative along ``axis`` (3-point stencil)."""
    h2 = h * h
    if boundary == PERIODIC:
        return (np.roll(arr, -1, axis=axis) - 2.0 * arr + np.roll(arr, 1, axis=axis)) / h2
    out = np.empty_like(arr)

    def sl(i):
        s = [slice(None)] * arr.ndim
        s[axis] = i
        return tuple(s)

    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    mid = [slice(None)] * arr.ndim
    lo[axis] = slice(2, None)
    hi[axis] = slice(None, -2)
    mid[axis] = slice(1, -1)
    out[tuple(mid)] = (arr[tuple(lo)] - 2.0 * arr[tuple(mid)] + arr[tuple(hi)]) / h2
    # 4-point one-sided second derivative, exact through cubics
    out[sl(0)] = (2.0 * arr[sl(0)] - 5.0 * arr[sl(1)] + 4.0 * arr[sl(2)] - arr[sl(3)]) / h2
    out[sl(-1)] = (2.0 * arr[sl(-1)] - 5.0 * arr[sl(-2)] + 4.0 * arr[sl(-3)] - arr[sl(-4)]) / h2
    return out


def _diff1_raw(grid: Grid, arr: np.ndarray, axis: int) -> np.ndarray:
    return _diff1(arr, axis, grid.spacing[axis], grid.boundary)


# ---------------------------------------------------------------------------
# differential operators
# ---------------------------------------------------------------------------


def gradient(f: ScalarField) -> VectorField:
    """Gradient of a scalar field, second-order accurate."""
    g = f.grid
    comps = [_diff1_raw(g, f.values, ax) for ax in range(3)]
    return VectorField(g, np.stack(comps, axis=-1))


def divergence(v: VectorField) -> ScalarField:
    """Divergence of a vector field."""
    g = v.grid
    out = _diff1_raw(g, v.values[..., 0], 0)
    out += _diff1_raw(g, v.values[..., 1], 1)
    out += _diff1_raw(g, v.values[..., 2], 2)
    return ScalarField(g, out)


def curl(v: VectorField) -> VectorField:
    """Curl of a vector field."""
    g = v.grid
    vx, vy, vz = v.values[..., 0], v.values[..., 1], v.values[..., 2]
    cx = _diff1_raw(g, vz, 1) - _diff1_raw(g, vy, 2)
    cy = _diff1_raw(g, vx, 2) - _diff1_raw(g, vz, 0)
    cz = _diff1_raw(g, vy, 0) - _diff1_raw(g, vx, 1)
    return VectorField(g, np.stack([cx, cy, cz], axis=-1))


def laplacian(f: ScalarField) -> ScalarField:
    """Scalar 7-point Laplacian."""
    g = f.grid
    out = _diff2(f.values, 0, g.spacing[0], g.boundary)
    out += _diff2(f.values, 1, g.spacing[1], g.boundary)
    out += _diff2(f.values, 2, g.spacing[2], g.boundary)
    return ScalarField(g, out)


def vector_laplacian(v: VectorField) -> VectorField:
    """Componentwise 7-point Laplacian of a vector field."""
    g = v.grid
    comps = []
    for c in range(3):
        acc = _diff2(v.values[..., c], 0, g.spacing[0], g.boundary)
        acc += _diff2(v.values[..., c], 1, g.spacing[1], g.boundary)
        acc += _diff2(v.values[..., c], 2, g.spacing[2], g.boundary)
        comps.append(acc)
    return VectorField(g, np.stack(comps, axis=-1))


def hessian(f: ScalarField) -> Matrix3Field:
    """Symmetric second-derivative matrix per point.

    Diagonal entries use the 3-point second-derivative stencil; mixed
    partials are compositions of first-derivative stencils (O(h^2)).
    """
    g = f.grid
    out = np.empty(g.shape + (3, 3))
    firsts = [_diff1_raw(g, f.values, ax) for ax in range(3)]
    for i in range(3):
        out[..., i, i] = _diff2(f.values, i, g.spacing[i], g.boundary)
        for j in range(i + 1, 3):
            mixed = _diff1_raw(g, firsts[j], i)
            out[..., i, j] = mixed
            out[..., j, i] = mixed
    return Matrix3Field(g, out)


def cross_matrix(a) -> np.ndarray:
    """3x3 antisymmetric matrix M with M @ b == a x b for every b."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise InvalidField(f"cross_matrix needs a finite 3-vector, got {a!r}")
    return np.array(
        [
            [0.0, -a[2], a[1]],
            [a[2], 0.0, -a[0]],
            [-a[1], a[0], 0.0],
        ]
    )


def cross_matrix_field(v: VectorField) -> Matrix3Field:
    """Per-point cross-product matrices of a vector field."""
    g = v.grid
    ax, ay, az = v.values[..., 0], v.values[..., 1], v.values[..., 2]
    out = np.zeros(g.shape + (3, 3))
    out[..., 0, 1] = -az
    out[..., 0, 2] = ay
    out[..., 1, 0] = az
    out[..., 1, 2] = -ax
    out[..., 2, 0] = -ay
    out[..., 2, 1] = ax
    return Matrix3Field(g, out)


def matrix_apply(m: Matrix3Field, v: VectorField) -> VectorField:
    """Pointwise matrix-vector product (m @ v at every grid point)."""
    require_same_grid(m, v)
    return VectorField(m.grid, np.einsum("...ij,...j->...i", m.values, v.values))


def cross(a: VectorField, b: VectorField) -> VectorField:
    """Pointwise cross product a x b."""
    require_same_grid(a, b)
    return VectorField(a.grid, np.cross(a.values, b.values))


def dot(a: VectorField, b: VectorField) -> ScalarField:
    """Pointwise dot product."""
    require_same_grid(a, b)
    return ScalarField(a.grid, np.sum(a.values * b.values, axis=-1))


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def max_norm(f) -> float:
    """Max pointwise magnitude of a scalar or vector field."""
    if isinstance(f, VectorField):
        return float(np.max(f.magnitude())) if f.grid.npoints else 0.0
    return float(np.max(np.abs(f.values)))


def l2_norm(f) -> float:
    """Cell-volume-weighted L2 norm, sqrt(sum |f|^2 dV)."""
    if isinstance(f, VectorField):
        sq = np.sum(f.values**2)
    else:
        sq = np.sum(np.abs(f.values) ** 2)
    return float(np.sqrt(sq * f.grid.cell_volume))
