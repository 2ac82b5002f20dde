"""Containment diagnostics for current configurations.

A current radiates at wavenumber k only if curl(curl J) = k^2 J; for a
curl-aligned flow (curl J = lambda J) that condition expands to
grad(lambda) x J + beta J = 0 with beta = lambda^2 - k^2, or pointwise
G J = 0 with G = [grad lambda]_x + beta I.  This module computes the
residuals of both forms, the spectrum of G, the kernel alignment of the
flow, and a classifier marking configurations whose radiation condition
is violated while they still carry flux: the signature of a confined,
non-radiating element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidField
from .fieldgrid import (
    ScalarField,
    VectorField,
    cross_matrix,
    curl,
    dot,
    gradient,
    l2_norm,
    max_norm,
    require_same_grid,
)
from .vortex_control import LambdaField

#: Cells with |J| above this fraction of max|J| count as flux-carrying.
FLUX_FRACTION = 0.01


@dataclass(frozen=True)
class RadiationTolerances:
    """Thresholds for the containment classifier.

    condition22_rel : the radiation-condition residual counts as
        violated when its L2 norm exceeds this fraction of
        max(k^2, 1) * ||J||.
    kernel_rel : a point is kernel-aligned when |G J| does not exceed
        this fraction of ||G||_2 |J| there.
    """

    condition22_rel: float = 1e-2
    kernel_rel: float = 1e-6

    def __post_init__(self):
        if not (self.condition22_rel > 0.0 and self.kernel_rel > 0.0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class RadiationReport:
    """Containment diagnostics of one (J, lambda, k) configuration.

    eigen_branch holds the computed per-point spectrum of G, shape
    (*grid, 3) complex: {beta, beta + i|grad lambda|, beta - i|grad
    lambda|}.  claimed_eigen_branch keeps the alternative spectrum
    {0, +i sqrt(1+|grad lambda|^2), -i sqrt(1+|grad lambda|^2)} side
    by side so reports can display both; it does not satisfy the
    characteristic polynomial in general, see g_eigenvalues.
    """

    condition22_residual: float
    condition24_residual: float
    beta: ScalarField
    eigen_branch: np.ndarray
    claimed_eigen_branch: np.ndarray
    kernel_alignment: float
    flux_fraction: float
    classified_nonradiating: bool


def radiation_condition_residual(J: VectorField, k: float) -> tuple[ScalarField, float]:
    """Pointwise norm and L2 norm of curl(curl J) - k^2 J."""
    if not np.isfinite(k):
        raise ValueError(f"k must be finite, got {k}")
    diff = curl(curl(J)).values - (k * k) * J.values
    mag = ScalarField(J.grid, np.sqrt(np.sum(diff**2, axis=-1)))
    return mag, l2_norm(mag)


def beltrami_expanded_residual(
    J: VectorField, lam: LambdaField, k: float
) -> tuple[ScalarField, float, ScalarField]:
    """Pointwise |grad(lambda) x J + beta J| with beta = lambda^2 - k^2;
    returns the magnitude field, its L2 norm, and the beta field."""
    require_same_grid(J, lam.values)
    if not np.isfinite(k):
        raise ValueError(f"k must be finite, got {k}")
    g = J.grid
    beta = ScalarField(g, lam.values.values**2 - k * k)
    grad_lam = gradient(lam.values)
    diff = np.cross(grad_lam.values, J.values) + beta.values[..., None] * J.values
    mag = ScalarField(g, np.sqrt(np.sum(diff**2, axis=-1)))
    return mag, l2_norm(mag), beta


def g_matrix(grad_lambda, beta: float) -> np.ndarray:
    """Pointwise coefficient matrix [grad lambda]_x + beta I."""
    m = cross_matrix(grad_lambda)
    if not np.isfinite(beta):
        raise InvalidField(f"beta must be finite, got {beta}")
    return m + beta * np.eye(3)


def g_eigenvalues(G: np.ndarray) -> tuple[complex, complex, complex]:
    """Closed-form spectrum of a matrix of the form [a]_x + beta I.

    The characteristic polynomial is det(G - mu I) =
    (beta - mu) [(beta - mu)^2 + |a|^2], so the eigenvalues are beta
    and beta +- i |a|.  The alternative set {0, +-i sqrt(1+|a|^2)}
    carried in RadiationReport for comparison does not satisfy this
    polynomial in general.
    """
    G = np.asarray(G, dtype=np.float64)
    if G.shape != (3, 3):
        raise InvalidField(f"expected a 3x3 matrix, got shape {G.shape}")
    beta = float(np.trace(G)) / 3.0
    a = np.array([G[2, 1] - G[1, 2], G[0, 2] - G[2, 0], G[1, 0] - G[0, 1]]) / 2.0
    mag = float(np.sqrt(np.sum(a**2)))
    return (complex(beta, 0.0), complex(beta, mag), complex(beta, -mag))


def g_matrix_norm(grad_lambda_mag: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Spectral (2-)norm of [a]_x + beta I: sqrt(beta^2 + |a|^2).

    Exact: M^T M = (beta^2 + |a|^2) I - a a^T has top eigenvalue
    beta^2 + |a|^2.
    """
    return np.sqrt(beta**2 + grad_lambda_mag**2)


def classify_nonradiating(
    J: VectorField,
    lam: LambdaField,
    k: float,
    tolerances: RadiationTolerances = RadiationTolerances(),
) -> RadiationReport:
    """Containment report for a current against a profile and drive
    wavenumber.

    kernel_alignment is the fraction of flux-carrying points (|J|
    above 1% of its max) where G J vanishes to tolerance relative to
    ||G||_2 |J|.  classified_nonradiating is true when the radiation
    condition is violated (relative residual above tolerance) while
    the configuration carries flux; a vacuous zero current is never
    classified.  All comparisons are scale-invariant in J.
    """
    require_same_grid(J, lam.values)
    g = J.grid
    _, res22 = radiation_condition_residual(J, k)
    _, res24, beta = beltrami_expanded_residual(J, lam, k)

    grad_lam = gradient(lam.values)
    grad_mag = grad_lam.magnitude()
    eig = np.empty(g.shape + (3,), dtype=np.complex128)
    eig[..., 0] = beta.values
    eig[..., 1] = beta.values + 1j * grad_mag
    eig[..., 2] = beta.values - 1j * grad_mag
    claimed = np.empty(g.shape + (3,), dtype=np.complex128)
    quoted = np.sqrt(1.0 + grad_mag**2)
    claimed[..., 0] = 0.0
    claimed[..., 1] = 1j * quoted
    claimed[..., 2] = -1j * quoted

    Jmag = J.magnitude()
    jmax = float(Jmag.max())
    flux = Jmag > FLUX_FRACTION * jmax if jmax > 0.0 else np.zeros(g.shape, dtype=bool)
    flux_fraction = float(flux.mean())

    if flux.any():
        GJ = np.cross(grad_lam.values, J.values) + beta.values[..., None] * J.values
        GJ_mag = np.sqrt(np.sum(GJ**2, axis=-1))
        bound = tolerances.kernel_rel * g_matrix_norm(grad_mag, beta.values) * Jmag
        aligned = GJ_mag[flux] <= bound[flux]
        kernel_alignment = float(aligned.mean())
    else:
        kernel_alignment = 0.0

    j_norm = l2_norm(J)
    scale = max(k * k, 1.0) * j_norm
    violated = j_norm > 0.0 and res22 > tolerances.condition22_rel * scale
    classified = bool(flux.any() and violated)

    return RadiationReport(
        condition22_residual=res22,
        condition24_residual=res24,
        beta=beta,
        eigen_branch=eig,
        claimed_eigen_branch=claimed,
        kernel_alignment=kernel_alignment,
        flux_fraction=flux_fraction,
        classified_nonradiating=classified,
    )
