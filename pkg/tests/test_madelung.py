import numpy as np
import pytest
from conftest import dirichlet_grid, periodic_grid

from vortkit.errors import DegenerateState, GridMismatch
from vortkit.fieldgrid import ComplexField, Grid, ScalarField, VectorField, curl, l2_norm, max_norm
from vortkit.madelung import (
    MadelungFields,
    PhysicalParams,
    clebsch_vorticity,
    continuity_residual,
    decompose,
    probability_current,
    quantum_pressure,
    vorticity_identity_residual,
)

P = PhysicalParams()


def plane_wave(g, kx=1.0, ky=0.0, kz=0.0):
    X, Y, Z = g.meshgrid()
    return ComplexField(g, np.exp(1j * (kx * X + ky * Y + kz * Z)))


def smooth_vortex(g, winding=1, width=1.0):
    # (x + iy)^m exp(-r^2 / 2w^2): polynomial times Gaussian, smooth
    # everywhere including the axis
    X, Y, Z = g.meshgrid()
    r2 = X**2 + Y**2 + Z**2
    return ComplexField(g, ((X + 1j * Y) / width) ** winding * np.exp(-r2 / (2.0 * width**2)))


# ---------------------------------------------------------------------------
# probability current
# ---------------------------------------------------------------------------


def test_current_real_psi_is_zero():
    g = dirichlet_grid(16, length=6.0)
    X, Y, Z = g.meshgrid()
    psi = ComplexField(g, np.exp(-((X - 3) ** 2 + (Y - 3) ** 2 + (Z - 3) ** 2) / 2) + 0j)
    J = probability_current(psi, P)
    assert max_norm(J) < 1e-14


def test_current_plane_wave_uniform():
    # discrete gradient of exp(ikx) is i sin(kh)/h exp(ikx) exactly, so
    # J is uniform with magnitude (hbar/m) sin(kh)/h
    n = 32
    g = periodic_grid(n)
    h = g.spacing[0]
    k = 1.0
    psi = plane_wave(g, kx=k)
    J = probability_current(psi, P)
    expected = P.hbar / P.mass * np.sin(k * h) / h
    assert np.allclose(J.values[..., 0], expected, atol=1e-13)
    assert np.allclose(J.values[..., 1:], 0.0, atol=1e-13)
    # within O(h^2) of the analytic (hbar/m) k
    assert abs(expected - k) < k * h**2
    # uniform J has exactly zero curl
    assert max_norm(curl(J)) < 1e-13


def test_current_standing_wave_cancels():
    g = periodic_grid(32)
    X, _, _ = g.meshgrid()
    psi = ComplexField(g, 0.5 * (np.exp(1j * X) + np.exp(-1j * X)))
    J = probability_current(psi, P)
    assert max_norm(J) < 1e-13


def test_current_imaginary_contamination_small(rng):
    # recompute the defining combination in complex arithmetic and
    # check the imaginary part the implementation discards
    from vortkit.madelung import _complex_gradient

    g = periodic_grid(12)
    vals = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    psi = ComplexField(g, vals)
    dpsi = _complex_gradient(g, psi.values)
    anti = np.conj(psi.values)[..., None] * dpsi
    anti = anti - np.conj(anti)
    full = -1j * P.hbar / (2.0 * P.mass) * anti
    scale = np.abs(full).max()
    assert np.abs(full.imag).max() < 1e-13 * scale


def test_current_scales_quadratically(rng):
    g = periodic_grid(12)
    vals = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    psi = ComplexField(g, vals)
    J1 = probability_current(psi, P)
    alpha = 1.7
    J2 = probability_current(ComplexField(g, alpha * vals), P)
    assert np.allclose(J2.values, alpha**2 * J1.values, atol=1e-13 * max_norm(J1))


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------


def test_decompose_plane_wave():
    g = periodic_grid(32)
    f = decompose(plane_wave(g), P)
    assert np.allclose(f.R.values, 1.0, atol=1e-13)
    assert np.allclose(f.rho.values, P.mass, atol=1e-13)
    # J equals probability_current exactly (same code path)
    J = probability_current(plane_wave(g), P)
    assert np.array_equal(f.J.values, J.values)
    # u = J / R = J here
    assert np.allclose(f.u.values, J.values, atol=1e-14)
    assert np.allclose(f.gradS.values, (P.mass / P.hbar) * J.values, atol=1e-14)
    assert f.support_mask().all()


def test_decompose_real_psi_zero_current():
    g = dirichlet_grid(16, length=8.0)
    X, Y, Z = g.meshgrid()
    c = 4.0
    psi = ComplexField(g, np.exp(-((X - c) ** 2 + (Y - c) ** 2 + (Z - c) ** 2) / 2) + 0j)
    f = decompose(psi, P)
    assert max_norm(f.J) < 1e-14
    assert max_norm(f.gradS) < 1e-12
    # vacuum corners are masked
    assert not f.support_mask().all()
    assert np.all(f.u.values[~f.support_mask()] == 0.0)


def test_decompose_rejects_zero_psi():
    g = periodic_grid(8)
    with pytest.raises(DegenerateState):
        decompose(ComplexField(g, np.zeros(g.shape, dtype=complex)), P)


def test_decompose_global_phase_invariance():
    g = periodic_grid(16)
    psi = smooth_vortex(g.__class__(g.dims, g.spacing, (-np.pi, -np.pi, -np.pi), g.boundary), 1)
    f1 = decompose(psi, P)
    f2 = decompose(ComplexField(psi.grid, psi.values * np.exp(1j * 0.8317)), P)
    assert np.allclose(f1.R.values, f2.R.values, atol=1e-14)
    assert np.allclose(f1.J.values, f2.J.values, atol=1e-14 * max(max_norm(f1.J), 1.0))


def test_decompose_vortex_circulates():
    # azimuthal-phase state: the current winds counterclockwise around
    # the axis; discrete circulation around a mid-radius grid square is
    # positive
    n = 33
    L = 8.0
    h = L / (n - 1)
    # axis passes between grid points
    g = Grid(dims=(n, n, n), spacing=(h, h, h), origin=(-L / 2 + h / 3, -L / 2 + h / 3, -L / 2), boundary="dirichlet0")
    X, Y, Z = g.meshgrid()
    phi = np.arctan2(Y, X)
    r2 = X**2 + Y**2 + Z**2
    psi = ComplexField(g, np.exp(-r2 / 2.0) * np.exp(1j * phi))
    f = decompose(psi, P)
    # square loop of edge offset m around the center indices, mid z
    ci = n // 2
    m = 6
    lo, hi = ci - m, ci + m
    kz = n // 2
    Jv = f.J.values
    circ = 0.0
    circ += np.sum(Jv[lo:hi, lo, kz, 0]) * h  # bottom edge, +x
    circ += np.sum(Jv[hi, lo:hi, kz, 1]) * h  # right edge, +y
    circ -= np.sum(Jv[hi:lo:-1, hi, kz, 0]) * h  # top edge, -x
    circ -= np.sum(Jv[hi, hi:lo:-1, kz, 1]) * h  # left edge, -y
    assert circ > 0.0


# ---------------------------------------------------------------------------
# quantum pressure
# ---------------------------------------------------------------------------


def test_quantum_pressure_isotropic_gaussian():
    # rho = exp(-r^2): ln rho = -r^2 is quadratic, so the discrete
    # Hessian is exact (-2 I) wherever the floor does not clamp, giving
    # P = (hbar^2/m) rho I to rounding
    g = dirichlet_grid(24, length=5.0)
    X, Y, Z = g.meshgrid()
    r2 = (X - 2.5) ** 2 + (Y - 2.5) ** 2 + (Z - 2.5) ** 2
    rho = ScalarField(g, np.exp(-r2))
    Pt = quantum_pressure(rho, P)
    coeff = P.hbar**2 / P.mass
    for i in range(3):
        assert np.allclose(Pt.values[..., i, i], coeff * rho.values, atol=1e-12)
        for j in range(i + 1, 3):
            assert np.allclose(Pt.values[..., i, j], 0.0, atol=1e-12)


def test_quantum_pressure_constant_density():
    g = periodic_grid(12)
    rho = ScalarField(g, np.full(g.shape, 2.5))
    Pt = quantum_pressure(rho, P)
    assert np.abs(Pt.values).max() < 1e-10


def test_quantum_pressure_one_dimensional():
    g = dirichlet_grid(20, length=4.0)
    X, _, _ = g.meshgrid()
    rho = ScalarField(g, np.exp(-((X - 2.0) ** 2)))
    Pt = quantum_pressure(rho, P)
    coeff = P.hbar**2 / P.mass
    assert np.allclose(Pt.values[..., 0, 0], coeff * rho.values, atol=1e-12)
    assert np.abs(Pt.values[..., 1, 1]).max() < 1e-12
    assert np.abs(Pt.values[..., 0, 1]).max() < 1e-12


def test_quantum_pressure_rejects_negative():
    g = periodic_grid(8)
    with pytest.raises(ValueError):
        quantum_pressure(ScalarField(g, np.full(g.shape, -1.0)), P)


# ---------------------------------------------------------------------------
# vorticity three ways
# ---------------------------------------------------------------------------


def test_clebsch_plane_wave_zero():
    g = periodic_grid(32)
    w = clebsch_vorticity(plane_wave(g), P)
    assert max_norm(w) < 1e-12


def test_clebsch_real_gaussian_zero():
    g = dirichlet_grid(16, length=6.0)
    X, Y, Z = g.meshgrid()
    psi = ComplexField(g, np.exp(-((X - 3) ** 2 + (Y - 3) ** 2 + (Z - 3) ** 2)) + 0j)
    assert max_norm(clebsch_vorticity(psi, P)) < 1e-12


def _vortex_grid(n, L=10.0):
    h = L / (n - 1)
    return Grid(dims=(n, n, n), spacing=(h, h, h), origin=(-L / 2, -L / 2, -L / 2), boundary="dirichlet0")


def line_vortex(g, winding=2, width=9.0):
    # straight vortex line along z: winding-m phase, wide radial
    # envelope, no z dependence
    X, Y, _ = g.meshgrid()
    rho2 = X**2 + Y**2
    return ComplexField(g, ((X + 1j * Y) / width) ** winding * np.exp(-rho2 / (2.0 * width**2)))


def test_clebsch_matches_direct_curl_under_refinement():
    # smooth vortex: both computations are O(h^2) discretizations of
    # the same field; their gap shrinks ~4x per halving
    def gap(n):
        g = _vortex_grid(n, L=12.0)
        psi = smooth_vortex(g, winding=1, width=1.5)
        a = clebsch_vorticity(psi, P)
        b = curl(probability_current(psi, P))
        return max_norm(VectorField(g, a.values - b.values)) / max_norm(b)

    g1, g2 = gap(25), gap(49)
    assert g2 < g1
    assert 2.5 < g1 / g2 < 6.0


def test_vorticity_identity_residual_plane_wave():
    g = periodic_grid(32)
    f = decompose(plane_wave(g), P)
    res = vorticity_identity_residual(f)
    assert max_norm(res) < 1e-10


def test_vorticity_identity_residual_refines():
    def worst(n):
        g = _vortex_grid(n)
        f = decompose(line_vortex(g), P)
        return max_norm(vorticity_identity_residual(f)) / max_norm(curl(f.J))

    r1, r2 = worst(33), worst(65)
    assert r2 < 5.0 * (r1 / 4.0)  # within 5x of the refinement estimate
    assert 3.0 < r1 / r2 < 5.0


def test_vorticity_identity_residual_detects_perturbation():
    g = _vortex_grid(33)
    f = decompose(line_vortex(g), P)
    base = max_norm(vorticity_identity_residual(f))
    perturbed = MadelungFields(
        grid=f.grid,
        R=f.R,
        rho=f.rho,
        J=VectorField(g, f.J.values + np.array([0.1, 0.0, 0.0])),
        u=f.u,
        gradS=f.gradS,
        density_floor=f.density_floor,
    )
    assert max_norm(vorticity_identity_residual(perturbed)) > base


def test_three_vorticity_forms_pairwise_agree():
    # Clebsch form, identity form, and direct curl agree on the
    # flux-carrying region (cells with |J| above 1% of max) with
    # relative L2 gaps that shrink ~4x under halving
    def gaps(n):
        g = _vortex_grid(n)
        psi = line_vortex(g)
        f = decompose(psi, P)
        a = clebsch_vorticity(psi, P).values
        b = curl(f.J).values
        from vortkit.fieldgrid import cross, gradient
        from vortkit.madelung import log_density

        c = cross(gradient(log_density(f.R, f.density_floor)), f.J).values
        Jmag = f.J.magnitude()
        flux = Jmag > 0.01 * Jmag.max()
        ref = np.sqrt(np.sum(b[flux] ** 2))

        def rel(u, v):
            return np.sqrt(np.sum((u[flux] - v[flux]) ** 2)) / ref

        return rel(a, b), rel(b, c), rel(a, c)

    c1 = gaps(33)
    c2 = gaps(65)
    for a, b in zip(c1, c2):
        assert 3.0 < a / b < 6.0
    assert max(c2) < 1.2e-3


# ---------------------------------------------------------------------------
# continuity
# ---------------------------------------------------------------------------


def test_continuity_stationary_plane_wave():
    g = periodic_grid(32)
    f = decompose(plane_wave(g), P)
    res = continuity_residual(f.rho, f.rho, 1.0, f.J, P)
    # uniform J: divergence exactly zero
    assert max_norm(res) < 1e-13


def test_continuity_linear_in_time():
    g = periodic_grid(8)
    rho0 = ScalarField(g, np.full(g.shape, 1.0))
    rho1 = ScalarField(g, np.full(g.shape, 1.2))
    J = VectorField(g, np.zeros(g.shape + (3,)))
    res = continuity_residual(rho0, rho1, 0.5, J, P)
    assert np.allclose(res.values, 0.4, atol=1e-13)


def test_continuity_manufactured_solution():
    # rho(t) = 1 + t*x on a Dirichlet box, J = (-x^2/2m, 0, 0):
    # d rho/dt = x, div(m J) = -x exactly (quadratic differentiates
    # exactly), so the residual vanishes at the stencil level
    g = dirichlet_grid(16, length=2.0)
    X, _, _ = g.meshgrid()
    dt = 0.25
    rho0 = ScalarField(g, 1.0 + 0.0 * X)
    rho1 = ScalarField(g, 1.0 + dt * X)
    J = VectorField(g, np.stack([-X**2 / (2.0 * P.mass), 0 * X, 0 * X], axis=-1))
    res = continuity_residual(rho0, rho1, dt, J, P)
    assert max_norm(res) < 1e-13


def test_continuity_mms_smooth_convergence():
    # rho(t,x) = 1 + t sin(x), J = (-sin(x)/m) integrated: choose
    # J = (cos(x)/m, 0, 0) gives div(mJ) = -sin(x) + O(h^2); residual
    # is pure spatial truncation error, shrinking ~4x per halving
    def resid(n):
        g = periodic_grid(n)
        X, _, _ = g.meshgrid()
        dt = 1e-3
        rho0 = ScalarField(g, 1.0 + 0.0 * X)
        rho1 = ScalarField(g, 1.0 + dt * np.sin(X))
        J = VectorField(g, np.stack([np.cos(X) / P.mass, 0 * X, 0 * X], axis=-1))
        return max_norm(continuity_residual(rho0, rho1, dt, J, P))

    r1, r2 = resid(16), resid(32)
    assert 3.0 < r1 / r2 < 5.0


def test_continuity_validates_inputs():
    g = periodic_grid(8)
    g2 = periodic_grid(16)
    rho = ScalarField(g, np.ones(g.shape))
    rho_b = ScalarField(g2, np.ones(g2.shape))
    J = VectorField(g, np.zeros(g.shape + (3,)))
    with pytest.raises(GridMismatch):
        continuity_residual(rho, rho_b, 1.0, J, P)
    with pytest.raises(ValueError):
        continuity_residual(rho, rho, -1.0, J, P)


def test_physical_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(hbar=-1.0)
    with pytest.raises(ValueError):
        PhysicalParams(mass=0.0)
    with pytest.raises(ValueError):
        PhysicalParams(light_speed=np.nan)
    p = PhysicalParams()
    assert p.hbar == 1.0 and p.mass == 1.0 and p.charge == -1.0 and p.light_speed == 1.0
