"""Construction and validation of helical (curl-aligned) control fields.

A flow whose curl is everywhere proportional to itself, curl J = lambda
J, is force-free in the magnetic analogy and helical in structure.  For
a coherent superfluid phase the control field that sustains such a flow
is B = lambda grad(S) (optionally shifted by a spin density), with the
proportionality profile lambda constrained by solenoidality and
stationarity conditions.  This module builds those fields, checks the
constraint system, and provides the pointwise matrix form of the
general alignment condition for a charged flow in a vector potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChargeZero, ConstantLambdaForbidden, GridMismatch, LogDomainError
from .fieldgrid import (
    Grid,
    Matrix3Field,
    ScalarField,
    VectorField,
    cross,
    cross_matrix_field,
    curl,
    divergence,
    dot,
    gradient,
    l2_norm,
    matrix_apply,
    max_norm,
    require_same_grid,
)
from .madelung import FLOOR_FRACTION, PhysicalParams

#: Uniformity threshold: a profile whose total spread is below this
#: (relative to its magnitude) counts as constant.
_CONSTANT_TOL = 1e-15


@dataclass(frozen=True)
class LambdaField:
    """Vorticity eigenvalue profile lambda(r), inverse-length units.

    ``is_constant`` is detected at construction; ``lambda0`` holds the
    uniform value in that case and is None otherwise.
    """

    values: ScalarField
    is_constant: bool
    lambda0: float | None

    @classmethod
    def from_field(cls, values: ScalarField) -> "LambdaField":
        arr = values.values
        spread = float(arr.max() - arr.min())
        scale = max(float(np.abs(arr).max()), 1.0)
        if spread <= _CONSTANT_TOL * scale:
            return cls(values, True, float(arr.flat[0]))
        return cls(values, False, None)

    @classmethod
    def constant(cls, grid: Grid, lambda0: float) -> "LambdaField":
        return cls(ScalarField.full(grid, lambda0), True, float(lambda0))

    @property
    def grid(self) -> Grid:
        return self.values.grid


@dataclass(frozen=True)
class SpinField:
    """Spin density expectation, supplied as data (never computed from
    a wavefunction here).  The curl magnitude is recorded because the
    shifted control-field form assumes a curl-free spin texture."""

    s: VectorField
    curl_max: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "curl_max", max_norm(curl(self.s)))

    @property
    def grid(self) -> Grid:
        return self.s.grid


@dataclass(frozen=True)
class ConstraintTolerances:
    """Acceptance thresholds for the profile constraint system.

    The alignment (curl J = lambda J) bound defaults to infinity: it is
    the design target being diagnosed, not an admissibility constraint
    on lambda, so by default it never fails a report.
    """

    solenoidal_J: float = 1e-6
    constraint12: float = 1e-6
    constraint13: float = 1e-6
    constraint14: float = 1e-6
    beltrami: float = math.inf

    def __post_init__(self):
        for name in ("solenoidal_J", "constraint12", "constraint13", "constraint14", "beltrami"):
            v = getattr(self, name)
            if not v > 0.0:
                raise ValueError(f"tolerance {name} must be positive, got {v}")


@dataclass(frozen=True)
class ConstraintReport:
    """Residuals of the profile constraint system.

    constraint12: solenoidality of the control field, max |div(lambda J)|.
    constraint13: transversality of the profile gradient to the wave
    vector, max |grad(lambda) . k|.
    constraint14: stationarity coupling, max |grad(ln lambda) . grad(S)
    - d(ln R)/dt| in the log form, or the multiplied-through form
    |grad(lambda) . grad(S) - lambda d(ln R)/dt| when lambda is not
    strictly positive (``constraint14_form`` records which).
    """

    solenoidal_J_residual: float
    constraint12_residual: float
    constraint13_residual: float
    constraint14_residual: float
    constraint14_form: str
    nonconstant_lambda_ok: bool
    nonuniform_k: bool
    beltrami_residual: float
    passed: bool


def beltrami_residual(J: VectorField, lam: LambdaField) -> tuple[ScalarField, float, float]:
    """Pointwise |curl J - lambda J| plus its max and L2 norms."""
    require_same_grid(J, lam.values)
    diff = curl(J).values - lam.values.values[..., None] * J.values
    mag = ScalarField(J.grid, np.sqrt(np.sum(diff**2, axis=-1)))
    return mag, max_norm(mag), l2_norm(mag)


def superfluid_control_field(
    gradS_or_k: VectorField, lam: LambdaField, spin: SpinField | None = None
) -> VectorField:
    """Control field B = lambda grad(S), shifted by -s when a spin
    texture is supplied.

    A constant profile is rejected: it would make the control field
    stationary, and no time-varying vector potential generates it.
    """
    require_same_grid(gradS_or_k, lam.values)
    if lam.is_constant:
        raise ConstantLambdaForbidden(
            f"profile is uniform (value {lam.lambda0}); a non-constant profile is required"
        )
    out = lam.values.values[..., None] * gradS_or_k.values
    if spin is not None:
        require_same_grid(gradS_or_k, spin.s)
        out = out - spin.s.values
    return VectorField(gradS_or_k.grid, out)


def _is_uniform_vector(v: VectorField) -> bool:
    arr = v.values
    spread = float(np.max(arr.max(axis=(0, 1, 2)) - arr.min(axis=(0, 1, 2))))
    scale = max(float(np.abs(arr).max()), 1.0)
    return spread <= 1e-13 * scale


def check_lambda_constraints(
    lam: LambdaField,
    J: VectorField,
    k: VectorField,
    dlnR_dt: ScalarField | None = None,
    gradS: VectorField | None = None,
    tolerances: ConstraintTolerances = ConstraintTolerances(),
    require_log_form: bool = False,
) -> ConstraintReport:
    """Evaluate the admissibility constraints on a profile.

    Parameters
    ----------
    lam, J, k : profile, flow, and wave vector (k may be any vector
        field; a non-uniform k is legal but flagged in the report).
    dlnR_dt : optional
        Time derivative of ln R; omit for stationary flows (zero).
    gradS : optional
        Phase gradient; defaults to k (coherent phase S = k . r).
    tolerances : ConstraintTolerances
    require_log_form : bool
        The stationarity constraint divides by lambda (via ln lambda).
        By default a profile that is not strictly positive falls back
        to the multiplied-through form, recorded in the report; set
        this to insist on the log form, raising LogDomainError instead.
    """
    require_same_grid(lam.values, J, k)
    g = lam.grid
    if gradS is None:
        gradS = k
    else:
        require_same_grid(lam.values, gradS)
    if dlnR_dt is None:
        dlnR_dt = ScalarField(g, np.zeros(g.shape))
    else:
        require_same_grid(lam.values, dlnR_dt)

    lam_vals = lam.values.values
    solenoidal = max_norm(divergence(J))
    c12 = max_norm(divergence(VectorField(g, lam_vals[..., None] * J.values)))
    grad_lam = gradient(lam.values)
    c13 = max_norm(dot(grad_lam, k))

    positive = bool(np.all(lam_vals > 0.0))
    if positive:
        form = "log"
        grad_ln_lam = gradient(ScalarField(g, np.log(lam_vals)))
        c14 = float(np.abs(np.sum(grad_ln_lam.values * gradS.values, axis=-1) - dlnR_dt.values).max())
    else:
        if require_log_form:
            bad = int(np.count_nonzero(lam_vals <= 0.0))
            raise LogDomainError(f"profile is non-positive at {bad} points; log form unavailable")
        form = "multiplied"
        c14 = float(
            np.abs(np.sum(grad_lam.values * gradS.values, axis=-1) - lam_vals * dlnR_dt.values).max()
        )

    _, _, bel_l2 = beltrami_residual(J, lam)
    nonconstant_ok = not lam.is_constant
    passed = (
        nonconstant_ok
        and solenoidal <= tolerances.solenoidal_J
        and c12 <= tolerances.constraint12
        and c13 <= tolerances.constraint13
        and c14 <= tolerances.constraint14
        and bel_l2 <= tolerances.beltrami
    )
    return ConstraintReport(
        solenoidal_J_residual=solenoidal,
        constraint12_residual=c12,
        constraint13_residual=c13,
        constraint14_residual=c14,
        constraint14_form=form,
        nonconstant_lambda_ok=nonconstant_ok,
        nonuniform_k=not _is_uniform_vector(k),
        beltrami_residual=bel_l2,
        passed=passed,
    )


def gamma_matrix(R: ScalarField, lambda0: float, density_floor: float | None = None) -> Matrix3Field:
    """Pointwise coefficient matrix (1/R) [grad R]_x - lambda0 I.

    [a]_x is the antisymmetric matrix with [a]_x v = a x v.  Where R is
    at or below the floor the density term is dropped, leaving
    -lambda0 I.
    """
    g = R.grid
    if np.any(R.values < 0.0):
        raise ValueError("density must be nonnegative")
    if density_floor is None:
        density_floor = FLOOR_FRACTION * max(float(R.values.max()), 1.0)
    grad_R = gradient(R)
    mask = R.values > density_floor
    safe_R = np.where(mask, R.values, 1.0)
    scaled = np.where(mask[..., None], grad_R.values / safe_R[..., None], 0.0)
    out = cross_matrix_field(VectorField(g, scaled)).values.copy()
    idx = np.arange(3)
    out[..., idx, idx] -= lambda0
    return Matrix3Field(g, out)


def gauged_current(gradS: VectorField, A: VectorField, params: PhysicalParams) -> VectorField:
    """Gauged flow vector J0 = (c/q) grad S - A."""
    require_same_grid(gradS, A)
    if params.charge == 0.0:
        raise ChargeZero("gauged current requires a non-zero charge")
    coeff = params.light_speed / params.charge
    return VectorField(gradS.grid, coeff * gradS.values - A.values)


def general_condition_residual(
    R: ScalarField,
    gradS: VectorField,
    A: VectorField,
    B: VectorField,
    lambda0: float,
    params: PhysicalParams,
) -> tuple[ScalarField, float]:
    """Residual of the general alignment condition in its form
    multiplied through by R (no division, so vacuum regions are safe):

        (q/c) R B - [ grad R x w - lambda0 R w ],   w = grad S - (q/c) A.

    Returns the pointwise magnitude field and its max.  Constructing B
    as gamma_matrix(R, lambda0) applied to the gauged current makes
    this vanish identically: the matrix form is the solved form of the
    condition.
    """
    require_same_grid(R, gradS, A, B)
    g = R.grid
    qc = params.charge / params.light_speed
    w = gradS.values - qc * A.values
    grad_R = gradient(R)
    target = np.cross(grad_R.values, w) - lambda0 * R.values[..., None] * w
    diff = qc * R.values[..., None] * B.values - target
    mag = ScalarField(g, np.sqrt(np.sum(diff**2, axis=-1)))
    return mag, max_norm(mag)
