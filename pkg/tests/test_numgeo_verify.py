import numpy as np
import pytest

from thimc import _fd, surface, sym, verify
from thimc.errors import DegenerateError
from thimc.surface import NullGrid
from thimc.sym import ImmersionGrid


def interior_max(a, width=2):
    return float(np.abs(_fd.interior(np.asarray(a), width)).max())


def cylinder(r, n=65):
    """x0 = u + v, arc length u - v on a circle of radius r: metric -4 du dv."""
    grid = NullGrid.from_bounds((0.0, 0.5), (0.0, 0.5), n)
    U, V = grid.mesh()
    t, s = U + V, (U - V) / r
    P = np.stack([t, r * np.cos(s), r * np.sin(s)], -1)
    N = np.stack([0 * t, np.cos(s), np.sin(s)], -1)
    return ImmersionGrid.from_coords("E31", grid, P, N)


def test_plane_metric_and_null_defect():
    grid = NullGrid.from_bounds((0, 1), (0, 1), 17)
    U, V = grid.mesh()
    N = np.stack([0 * U, 0 * U, np.ones_like(U)], -1)
    imm = ImmersionGrid.from_coords("E31", grid, np.stack([U + V, U - V, 0 * U], -1), N)
    assert verify.null_defect(imm) <= 1e-14
    assert np.allclose(verify.induced_metric(imm)[..., 0, 1], -2)
    H, K = verify.mean_and_gauss_curvature(imm)
    assert np.max(np.abs(H)) <= 1e-12 and np.max(np.abs(K)) <= 1e-12
    # a spacelike plane has a Riemannian metric and is rejected
    spacelike = ImmersionGrid.from_coords("E31", grid, np.stack([0 * U, U + V, U - V], -1))
    with pytest.raises(DegenerateError):
        verify.induced_metric(spacelike)


def test_degenerate_metric_rejected():
    grid = NullGrid.from_bounds((0, 1), (0, 1), 9)
    U, V = grid.mesh()
    imm = ImmersionGrid.from_coords("E31", grid, np.stack([U, U, 0 * U], -1))
    with pytest.raises(DegenerateError):
        verify.induced_metric(imm)


@pytest.mark.parametrize("r", [0.5, 1.5])
def test_cylinder_curvatures(r):
    imm = cylinder(r)
    H, K = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(np.abs(H) - 1 / (2 * r)) <= 1e-7
    assert interior_max(K) <= 1e-7
    assert verify.null_defect(imm, 4) <= 1e-7
    assert verify.normal_orthogonality(imm, 4) <= 1e-7
    assert interior_max(verify.umbilic_norm(imm, 4)) >= 0.1 / r


def test_cylinder_convergence_order():
    errs = []
    for n in (17, 33, 65):
        H, _ = verify.mean_and_gauss_curvature(cylinder(1.0, n), 2)
        errs.append(interior_max(np.abs(H) - 0.5))
    assert np.log2(errs[0] / errs[1]) >= 1.8 and np.log2(errs[1] / errs[2]) >= 1.8


def test_bscroll_oracle(bscroll):
    imm, data, _ = bscroll
    H, K = verify.mean_and_gauss_curvature(imm, 4)
    assert interior_max(H - data.H) <= 1e-5
    assert interior_max(K - surface.gaussian_curvature(data, 4)) <= 1e-5


def test_check_thimc_cases(log_spiral):
    imm, data = log_spiral
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    out = verify.check_thimc(_fd.interior(H, 2), data.grid, 0, 4)
    assert out["harmonic_residual"] <= 1e-4 and out["fit_residual"] <= 1e-5
    grid = NullGrid.from_bounds((0, 1), (0, 1), 33)
    for c in (-1, 0, 1):
        assert verify.check_thimc(np.full(grid.shape, 2.0), grid, c)["harmonic_residual"] <= 1e-25
    with pytest.raises(DegenerateError):
        verify.check_thimc(np.zeros(grid.shape), grid, 0)


def test_additive_fit_detects_cross_terms():
    u = np.linspace(0, 1, 11)
    phi = np.add.outer(np.sin(u), u ** 2)
    assert verify.additive_fit(phi)[2] <= 1e-14
    assert verify.additive_fit(phi + np.outer(u, u))[2] >= 0.05


def test_h31_family_member(case1_plus):
    *_, data = case1_plus
    imm = sym.h31_surface(data, 0.5)
    assert imm.quadric_defect() <= 1e-10
    H, _ = verify.mean_and_gauss_curvature(imm, 4)
    Hc = sym.family_mean_curvature(data, 0.5, -1)
    assert interior_max(H - Hc) <= 1e-3
    assert float(np.min(Hc ** 2)) > 1
    out = verify.check_thimc(_fd.interior(Hc, 2), data.grid, -1, 4)
    assert out["harmonic_residual"] <= 1e-8


def test_verification_report_pass_and_fail(log_spiral):
    imm, data = log_spiral
    rep = verify.verification_report(data, imm, order=4)
    assert rep["pass"], rep["failed"]
    assert {"gauss_residual", "codazzi_residual", "thimc", "oracle_H", "oracle_metric",
            "oracle_hopf"} <= set(rep["checks"])
    U, V = data.grid.mesh()
    bad = data.with_fields(omega=data.omega + 0.01 * np.sin(7 * U) * np.cos(5 * V))
    rep = verify.verification_report(bad, order=4)
    assert not rep["pass"] and "gauss_residual" in rep["failed"]


def test_report_keys(log_spiral):
    imm, data = log_spiral
    r = verify.report(imm, data, order=4)
    assert r["ambient"] == "E31" and r["quadric_defect"] <= 1e-12
    assert max(r["H_error"], r["omega_error"], r["Q_error"], r["R_error"]) <= 1e-4


def test_verification_report_h2_oracle_gate(log_spiral):
    imm, data = log_spiral
    rep = verify.verification_report(data, imm, order=4, oracle_gate="h2")
    assert rep["pass"] and rep["oracle"]["H_error"] <= rep["oracle_bound"]
    U, _ = data.grid.mesh()
    shifted = data.with_fields(H=data.H + 0.01 * U, f=None, g=None)
    rep = verify.verification_report(shifted, imm, order=4, oracle_gate="h2")
    assert "oracle_H" in rep["failed"]
    with pytest.raises(ValueError):
        verify.verification_report(data, imm, oracle_gate="bogus")
