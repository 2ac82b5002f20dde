"""Structured-grid toolkit for quantum-fluid vorticity control.

Capabilities, by module:

- ``fieldgrid``: uniform grid, immutable field containers, second-order
  finite-difference operators (periodic or Dirichlet box).
- ``fieldexpr``: a tiny expression language for scalar profiles,
  evaluated on a grid.
- ``madelung``: hydrodynamic observables of a complex wavefunction
  (density, current, quantum pressure, vorticity, identity residuals).
- ``vortex_control``: Beltrami alignment residuals, the superfluid
  control field, admissibility checks for the proportionality profile,
  and the gauged-current matrix form.
- ``helmholtz_solver``: the linear vector-potential solve, the external
  drive current, the gauged eigenproblem, and the self-consistent loop.
- ``nonradiating``: containment diagnostics (radiation-condition
  residuals, the expanded alignment form, the pointwise coefficient
  matrix and its spectrum, and a containment classifier).
- ``gravito``: order-of-magnitude gravitomagnetic dipole estimates and
  the scalar-tensor source with its potential-fluctuation scale.
- ``fieldio`` / ``scenarios`` / ``cli``: file formats, canned scenario
  configurations, and the command-line entry point.
"""

from .errors import (
    ChargeZero,
    ConfigError,
    ConstantLambdaForbidden,
    DegenerateState,
    EigenSolverFailed,
    EvalDomainError,
    GridBudgetExceeded,
    GridMismatch,
    InvalidField,
    LogDomainError,
    ParseError,
    SolverDiverged,
    VortkitError,
)
from .fieldgrid import (
    DIRICHLET0,
    PERIODIC,
    ComplexField,
    Grid,
    Matrix3Field,
    ScalarField,
    VectorField,
    cross,
    cross_matrix,
    cross_matrix_field,
    curl,
    divergence,
    dot,
    gradient,
    hessian,
    l2_norm,
    laplacian,
    matrix_apply,
    max_norm,
    vector_laplacian,
)

__version__ = "0.1.0"

__all__ = [
    "ChargeZero",
    "ComplexField",
    "ConfigError",
    "ConstantLambdaForbidden",
    "DegenerateState",
    "DIRICHLET0",
    "EigenSolverFailed",
    "EvalDomainError",
    "Grid",
    "GridBudgetExceeded",
    "GridMismatch",
    "InvalidField",
    "LogDomainError",
    "Matrix3Field",
    "ParseError",
    "PERIODIC",
    "ScalarField",
    "SolverDiverged",
    "VectorField",
    "VortkitError",
    "cross",
    "cross_matrix",
    "cross_matrix_field",
    "curl",
    "divergence",
    "dot",
    "gradient",
    "hessian",
    "l2_norm",
    "laplacian",
    "matrix_apply",
    "max_norm",
    "vector_laplacian",
    "__version__",
]
