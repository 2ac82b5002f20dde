"""Weak-field rotational gravity estimates and the scalar-tensor
electromagnetic source term.

This module alone carries SI constants; everything else in the package
works in natural units.  Field inputs here are taken to be in SI
already: converting natural-unit fields is the caller's job and needs
an explicit record of length, time, and mass scales.  The units of the
scalar-tensor quantities follow the source convention of the coupling
constant and are labeled convention-dependent in reports.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .fieldgrid import (
    Matrix3Field,
    ScalarField,
    VectorField,
    divergence,
    gradient,
    hessian,
    max_norm,
    require_same_grid,
)
from .helmholtz_solver import poisson_dirichlet
from .madelung import PhysicalParams

#: CODATA-rounded Newton constant, m^3 kg^-1 s^-2.
G_NEWTON_SI = 6.674e-11
#: Speed of light, m/s, rounded to the precision the estimates carry.
LIGHT_SPEED_SI = 2.998e8


class DipoleFormula(enum.Enum):
    """Which closed form produced a dipole estimate.

    GENERAL_TIME_DERIVATIVE keeps the squared radius ratio inside the
    time derivative; CONSTANT_RATIO extracts it as a constant;
    INTERNAL_FIELDS rewrites the drive through the flow's own density
    and potential; POTENTIAL_GRADIENT keeps only the dimensionless
    potential-gradient part.
    """

    GENERAL_TIME_DERIVATIVE = "general_time_derivative"
    CONSTANT_RATIO = "constant_ratio"
    INTERNAL_FIELDS = "internal_fields"
    POTENTIAL_GRADIENT = "potential_gradient"


@dataclass(frozen=True)
class GravitoParams:
    """SI inputs for the estimates.

    Lambda_ratio is the inner/outer radius ratio of the confined
    toroidal flow, in (0, 1]; kappa the scalar-tensor coupling; mass
    the circulating mass in kg.
    """

    G_newton: float = G_NEWTON_SI
    c_SI: float = LIGHT_SPEED_SI
    Lambda_ratio: float = 1.0
    kappa: float = 1e-4
    mass: float = 1.0

    def __post_init__(self):
        for name in ("G_newton", "c_SI", "Lambda_ratio", "kappa", "mass"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if self.Lambda_ratio > 1.0:
            raise ValueError(f"Lambda_ratio must lie in (0, 1], got {self.Lambda_ratio}")


@dataclass(frozen=True)
class DipoleEstimate:
    """One gravitomagnetic dipole number: the signed vector, the
    positive prefactor it was built with, and which formula produced
    it."""

    value: np.ndarray
    formula_used: DipoleFormula
    coefficient: float

    def __post_init__(self):
        v = np.asarray(self.value, dtype=np.float64)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise ValueError("value must be a finite 3-vector")
        object.__setattr__(self, "value", v)
        if not (np.isfinite(self.coefficient) and self.coefficient > 0.0):
            raise ValueError(f"coefficient must be positive, got {self.coefficient}")


def gravitomagnetic_permeability(p: GravitoParams) -> float:
    """Gravitomagnetic analogue of the vacuum permeability, 4 pi G / c^2."""
    return 4.0 * math.pi * p.G_newton / (p.c_SI * p.c_SI)


def _vec3(v) -> np.ndarray:
    out = np.asarray(v, dtype=np.float64)
    if out.shape != (3,) or not np.all(np.isfinite(out)):
        raise ValueError("expected a finite 3-vector")
    return out


def dipole_time_derivative(flux_rate, p: GravitoParams) -> DipoleEstimate:
    """Dipole from the general form that keeps the squared radius
    ratio inside the time derivative.

    flux_rate is d/dt[u (r/R)^2] supplied whole by the caller; the
    prefactor is mu_G / 4 pi = G / c^2.  Note this sits a factor 4 pi
    above the constant-ratio form's prefactor: both closed forms are
    kept literally as stated rather than reconciled.
    """
    coeff = p.G_newton / (p.c_SI * p.c_SI)
    return DipoleEstimate(
        value=-coeff * _vec3(flux_rate),
        formula_used=DipoleFormula.GENERAL_TIME_DERIVATIVE,
        coefficient=coeff,
    )


def dipole_ratio_form(du_dt, p: GravitoParams) -> DipoleEstimate:
    """Dipole for a constant radius ratio: -(G Lambda^2 / 4 pi c^2) du/dt."""
    coeff = p.G_newton * p.Lambda_ratio**2 / (4.0 * math.pi * p.c_SI * p.c_SI)
    return DipoleEstimate(
        value=-coeff * _vec3(du_dt),
        formula_used=DipoleFormula.CONSTANT_RATIO,
        coefficient=coeff,
    )


def quantum_term_matrix(
    rho: ScalarField, hbar: float, density_floor: float
) -> Matrix3Field:
    """Raw tensor -(hbar^2/2) hess(ln rho) before contraction, zeroed
    below the density floor."""
    if not (np.isfinite(hbar) and hbar > 0.0):
        raise ValueError(f"hbar must be positive, got {hbar}")
    if not (np.isfinite(density_floor) and density_floor > 0.0):
        raise ValueError(f"density_floor must be positive, got {density_floor}")
    if np.any(rho.values < 0.0):
        raise ValueError("density must be nonnegative")
    ln = ScalarField(rho.grid, np.log(np.maximum(rho.values, density_floor)))
    vals = -(hbar * hbar / 2.0) * hessian(ln).values
    vals[rho.values <= density_floor] = 0.0
    return Matrix3Field(rho.grid, vals)


def dipole_internal_form(
    rho: ScalarField,
    U: ScalarField,
    p: GravitoParams,
    params: PhysicalParams,
    density_floor: float,
) -> VectorField:
    """Pointwise dipole density rewritten through the flow's own
    fields: (G Lambda^2 / 4 pi m c^2) [quantum stress term + grad U].

    The tensor part is contracted to a vector as the density-weighted
    stress divergence (1/rho) div(rho M) with M = -(hbar^2/2)
    hess(ln rho), matching the momentum equation's pressure form; the
    uncontracted M is available via quantum_term_matrix.  Points at or
    below density_floor are zeroed.  hbar comes from params and must
    be the SI value for an SI estimate; m and c come from p.
    """
    require_same_grid(rho, U)
    g = rho.grid
    M = quantum_term_matrix(rho, params.hbar, density_floor)
    mask = rho.values > density_floor
    weighted = rho.values[..., None, None] * M.values
    qvec = np.zeros(g.shape + (3,))
    for i in range(3):
        row = VectorField(g, np.ascontiguousarray(weighted[..., i, :]))
        qvec[..., i] = divergence(row).values
    qvec[mask] /= rho.values[mask][..., None]
    qvec[~mask] = 0.0
    coeff = p.G_newton * p.Lambda_ratio**2 / (
        4.0 * math.pi * p.mass * p.c_SI * p.c_SI
    )
    out = coeff * (qvec + gradient(U).values)
    out[~mask] = 0.0
    return VectorField(g, out)


def dipole_approx(grad_Ustar: VectorField, p: GravitoParams) -> VectorField:
    """Potential-gradient approximation (G Lambda^2 / 4 pi) grad U*,
    where U* is the interaction energy over the rest mass-energy."""
    coeff = p.G_newton * p.Lambda_ratio**2 / (4.0 * math.pi)
    return VectorField(grad_Ustar.grid, coeff * grad_Ustar.values)


def scalar_tensor_source(
    B: VectorField, E: VectorField, p: GravitoParams
) -> ScalarField:
    """Metric-fluctuation source kappa (|B|^2 - |E|^2 / c^2).

    Quadratic in both fields, so invariant under flipping either sign;
    vanishes exactly for light-like balance |E| = c|B|.  Units follow
    the coupling's source convention (convention-dependent).
    """
    require_same_grid(B, E)
    b2 = np.sum(B.values**2, axis=-1)
    e2 = np.sum(E.values**2, axis=-1)
    return ScalarField(B.grid, p.kappa * (b2 - e2 / (p.c_SI * p.c_SI)))


def potential_fluctuation_scale(source: ScalarField, p: GravitoParams) -> float:
    """Order-of-magnitude local potential fluctuation c^2 max|grad Theta|
    for the static reduction lap(Theta) = source on a closed box with
    zero boundary values."""
    theta = poisson_dirichlet(source.grid, source)
    return p.c_SI * p.c_SI * max_norm(gradient(theta))
