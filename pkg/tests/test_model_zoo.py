import numpy as np
import pytest
import sympy as sp

from thimc import _fd, surface, verify, zoo
from thimc.errors import DegenerateError, InvariantError, PoleError
from thimc.surface import NullGrid


def interior_max(a, width=2):
    return float(np.abs(_fd.interior(np.asarray(a), width)).max())


def test_rk4_exponential():
    y = zoo.rk4(lambda s, y: y, [1.0], 0.0, 0.01, 101)
    assert y[-1, 0] == pytest.approx(np.e, rel=1e-9)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_circular_cylinder(r):
    grid = NullGrid.from_bounds((0.0, 0.5), (0.0, 0.5), 65)
    imm, data = zoo.thimc_cylinder(zoo.CurveSpec("circle", 0.0, r), grid)
    assert np.allclose(data.H, 1 / (2 * r))
    H, K = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(H - 1 / (2 * r)) <= 1e-6
    assert interior_max(K) <= 1e-6
    # constant H: the Minkowski deformation family exists for small tau
    from thimc.sym import deformed_quantities
    for tau in (0.05, -0.05):
        assert surface.gauss_codazzi_gate(deformed_quantities(data, tau))["pass"]


def test_log_spiral_inverse_H_is_harmonic(log_spiral):
    imm, data = log_spiral
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    rep = verify.check_thimc(_fd.interior(H, 2), imm.grid, 0, order=2)
    assert rep["harmonic_residual"] <= 1e-5
    assert rep["fit_residual"] <= 1e-6
    assert interior_max(H - data.H) <= 1e-6


@pytest.mark.parametrize("kind,C1,C2", [("log_pseudospiral", 1.0, 0.3), ("timelike_hyperbola", 0.0, 0.7)])
def test_timelike_cylinders(kind, C1, C2):
    grid = NullGrid.from_bounds((0.1, 0.4), (0.1, 0.4), 129)
    imm, data = zoo.thimc_cylinder(zoo.CurveSpec(kind, C1, C2), grid)
    assert verify.verification_report(data, imm, order=4)["pass"]


def test_curve_spec_validation():
    with pytest.raises(InvariantError):
        zoo.CurveSpec("circle", 1.0, 1.0)
    with pytest.raises(InvariantError):
        zoo.CurveSpec("log_spiral", 0.0, 1.0)
    with pytest.raises(PoleError):
        zoo.CurveSpec("log_spiral", 1.0, -0.5).curvature(np.linspace(0, 1, 5))


def test_bscroll_oracles(bscroll):
    imm, data, frame = bscroll
    s = imm.grid.u[:, None] * np.ones(imm.grid.shape)
    H, K = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(H - 1 / s) <= 1e-4
    assert interior_max(K - 1 / s ** 2) <= 1e-4
    assert np.all(data.Q * data.R == 0)
    assert verify.umbilic_norm(imm, 4).max() > 0.1
    rep = verify.check_thimc(_fd.interior(H, 2), imm.grid, 0)
    assert rep["harmonic_residual"] <= 1e-6


def test_bscroll_constant_torsion_is_not_umbilic():
    """kappa = 0, tau = 1: H = K = 1 and II - H I should not vanish."""
    grid = NullGrid.from_bounds((0.5, 1.0), (-1.5, -1.0), 129)
    imm, data, _ = zoo.b_scroll(lambda s: 0.0 * s, lambda s: 1.0 + 0.0 * s, grid)
    H, K = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(H - 1) <= 1e-4 and interior_max(K - 1) <= 1e-4
    assert verify.umbilic_norm(imm, 4).max() > 0.1


def test_null_frame_gram_drift():
    for corr in (False, True):
        fr = zoo.null_frame(np.sin, lambda s: 1 / (1 + s), 1.0, 1e-3, 1001, gram_correction=corr)
        assert fr.gram_drift() <= 1e-8


def test_revolution_constant_omega_timelike_axis():
    s = sp.Symbol("s")
    a = 2.0
    prof = zoo.profile_from_functions("x", 0.5, 0.01, 101, sp.Integer(0) * s, a * s)
    spec = zoo.RevolutionSpec("timelike", a, prof)
    assert np.allclose(zoo.closed_form_H(spec), -4 * a ** 2 / (8 * a))
    imm, data = zoo.revolution_surface(spec)
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(H + a / 2) <= 1e-8
    with pytest.raises(InvariantError):
        zoo.RevolutionSpec("timelike", a, zoo.profile_from_functions("x", 0.5, 0.01, 11, 0 * s, s))


def test_null_axis_uncorrected_closed_form():
    prof = zoo.solve_null_axis(0.0, 1.0)
    H = zoo.closed_form_H(prof.spec)
    assert np.max(np.abs(1 / H - 4 * prof.x)) <= 1e-5


def test_null_axis_uncorrected_surface_mean_curvature():
    """The immersion built from the quadrature profile should have 1/H = 4x."""
    prof = zoo.solve_null_axis(0.0, 1.0)
    imm, data = zoo.revolution_surface(prof.spec)
    k, s0, h = zoo.profile_index(data.grid, "x")
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(1 / H - 4 * (s0 + h * k)) <= 1e-5


def test_null_axis_consistent_variant_is_thimc():
    prof = zoo.solve_null_axis(0.0, 1.0, variant="consistent")
    imm, data = zoo.revolution_surface(prof.spec)
    k, s0, h = zoo.profile_index(data.grid, "x")
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(1 / H - 4 * (s0 + h * k)) <= 1e-5
    assert verify.verification_report(data, imm, order=4)["pass"]


@pytest.mark.parametrize("c1,a0,domain", [(0.0, 1.0, (1.0, 1.5)), (1.0, 0.5, (1.0, 1.3))])
def test_null_axis_ode_matches_quadrature(c1, a0, domain):
    prof = zoo.solve_null_axis(c1, a0, domain)
    assert prof.discrepancy <= 1e-6
    h = prof.x[1] - prof.x[0]
    aq = prof.a_quadrature
    d1 = _fd.derivative(aq, h, deriv=1, order=4)
    d2 = _fd.derivative(aq, h, deriv=2, order=4)
    assert np.max(np.abs(zoo.null_axis_residual(prof.x, aq, d1, d2)[4:-4])) <= 1e-7
    assert zoo.constraint_residual(prof.spec) <= 1e-8


def test_painleve_zero_solution_rejected():
    with pytest.raises(DegenerateError):
        zoo.solve_painleve_profile("trig", 0.0, 0.0)


@pytest.mark.parametrize("kind,branch", [("trig", None), ("hyp", "minus"), ("hyp", "plus"),
                                         ("cosh", "consistent")])
def test_painleve_profiles(kind, branch):
    prof = zoo.solve_painleve_profile(kind, branch=branch)
    assert prof.ode_residual <= 1e-7
    assert zoo.solve_painleve_profile(kind, branch=branch, substeps=8).ode_residual <= 1e-7
    imm, data = zoo.revolution_surface(prof.spec)
    assert zoo.constraint_residual(prof.spec) <= 1e-8 * 4
    fit = data.meta["inverse_H_affine"]
    assert fit["slope"] == pytest.approx(1.0, abs=1e-6) and fit["residual"] <= 1e-6
    assert verify.verification_report(data, imm, order=4)["pass"]


def test_painleve_cosh_uncorrected_violates_constraint():
    prof = zoo.solve_painleve_profile("cosh")
    assert prof.anomalous
    with pytest.raises(InvariantError):
        prof.spec


def test_trig_surface_inverse_H_is_y(trig_revolution):
    prof, imm, data = trig_revolution
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    U, V = data.grid.mesh()
    y = (U + V) / 2
    assert interior_max(1 / H - y) <= 1e-5
    assert verify.verification_report(data, imm, order=4)["pass"]


def test_cmc_data():
    data = zoo.cmc_data(2.0, NullGrid.from_bounds((0, 1), (0, 1), 9))
    assert np.all(data.H == 2.0) and np.all(data.Q == 1.0)
    with pytest.raises(DegenerateError):
        zoo.cmc_data(0.0, data.grid)
