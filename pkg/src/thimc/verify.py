"""Independent geometry oracle for discrete immersions.

Everything here is recomputed from the sampled points alone (plus the
orientation of the stored normal): the induced metric, the normal, the
second fundamental form, mean and Gaussian curvature, Hopf differentials
and the harmonicity of 1/H.  Metric entries use the bilinear convention
``I(d_u, d_v) = e^omega / 2`` for ``I = e^omega du dv``.
"""
import numpy as np

from . import _fd
from . import lorentz as lz
from .config import tol
from .errors import DegenerateError

AMBIENT_C = {"E31": 0, "S31": 1, "H31": -1}


def _derivs(P, grid, order):
    du, dv = grid.du, grid.dv
    return {
        "u": _fd.d_u(P, du, order), "v": _fd.d_v(P, dv, order),
        "uu": _fd.d_uu(P, du, order), "vv": _fd.d_vv(P, dv, order),
        "uv": _fd.d_uv(P, du, dv, order),
    }


def induced_metric(imm, order=2):
    """Per-node (E, F, G) = (<F_u,F_u>, <F_u,F_v>, <F_v,F_v>) as a (..., 2, 2) array."""
    P = imm.points
    a = imm.ambient
    Pu, Pv = _fd.d_u(P, imm.grid.du, order), _fd.d_v(P, imm.grid.dv, order)
    E, F, G = lz.inner(Pu, Pu, a), lz.inner(Pu, Pv, a), lz.inner(Pv, Pv, a)
    g = np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)
    det = E * G - F ** 2
    if np.any(det >= 0):
        bad = np.argwhere(det >= 0)
        raise DegenerateError(f"metric not Lorentzian at {len(bad)} nodes, first {tuple(bad[0])}")
    return g


def tangency_defect(imm, order=2):
    """max |<F, F_u>|, |<F, F_v>| for quadric ambients (zero for E31)."""
    if imm.ambient == "E31":
        return 0.0
    P = imm.points
    Pu, Pv = _fd.d_u(P, imm.grid.du, order), _fd.d_v(P, imm.grid.dv, order)
    return float(max(np.abs(lz.inner(P, Pu, imm.ambient)).max(),
                     np.abs(lz.inner(P, Pv, imm.ambient)).max()))


def _cross_e31(a, b):
    """Vector n with <n, x> = det(a, b, x) for the E31 metric."""
    return np.cross(a, b) @ lz.METRIC_E31


def _cross4(p, a, b, metric):
    """Vector n with <n, x> = det(p, a, b, x) in a 4D model."""
    M = np.stack([p, a, b], axis=-2)
    n = np.empty(p.shape)
    for k in range(4):
        cols = [i for i in range(4) if i != k]
        n[..., k] = (-1) ** (k + 3) * np.linalg.det(M[..., cols])
    return n @ metric


def recompute_normal(imm, order=2):
    """Unit normal from the points, oriented like the stored normal when present."""
    P = imm.points
    a = imm.ambient
    Pu, Pv = _fd.d_u(P, imm.grid.du, order), _fd.d_v(P, imm.grid.dv, order)
    if a == "E31":
        n = _cross_e31(Pu, Pv)
    else:
        n = _cross4(P, Pu, Pv, lz.METRICS[a])
    nn = lz.inner(n, n, a)
    if np.any(nn <= 0):
        raise DegenerateError("normal is not spacelike")
    n = n / np.sqrt(nn)[..., None]
    if imm.N is not None:
        s = np.sign(lz.inner(n, imm.normals, a))
        s[s == 0] = 1
        n = n * s[..., None]
    return n


def fundamental_forms(imm, order=2, normal="recomputed"):
    """First and second fundamental forms as (..., 2, 2) arrays plus the normal used."""
    P = imm.points
    d = _derivs(P, imm.grid, order)
    a = imm.ambient
    I = induced_metric(imm, order)
    N = recompute_normal(imm, order) if normal == "recomputed" else imm.normals
    L, M, Nn = (lz.inner(d[k], N, a) for k in ("uu", "uv", "vv"))
    II = np.stack([np.stack([L, M], -1), np.stack([M, Nn], -1)], -2)
    return I, II, N


def mean_and_gauss_curvature(imm, order=2, normal="recomputed"):
    """(H, K) with H = tr(I^-1 II)/2 and K = det(I^-1 II) + c (intrinsic curvature)."""
    I, II, _ = fundamental_forms(imm, order, normal)
    S = np.linalg.solve(I, II)
    H = 0.5 * (S[..., 0, 0] + S[..., 1, 1])
    K = np.linalg.det(S) + AMBIENT_C[imm.ambient]
    return H, K


def hopf_and_omega(imm, order=2, normal="recomputed"):
    """(omega, Q, R) read off the discrete immersion; omega = log(2 <F_u, F_v>)."""
    I, II, _ = fundamental_forms(imm, order, normal)
    G = I[..., 0, 1]
    sign = np.where(G > 0, 1.0, -1.0)
    return np.log(2.0 * np.abs(G)), II[..., 0, 0], II[..., 1, 1], sign


def umbilic_norm(imm, order=2):
    """Frobenius norm of II - H I per node."""
    I, II, _ = fundamental_forms(imm, order)
    S = np.linalg.solve(I, II)
    H = 0.5 * (S[..., 0, 0] + S[..., 1, 1])
    D = II - H[..., None, None] * I
    return np.sqrt(np.sum(D ** 2, axis=(-1, -2)))


def null_defect(imm, order=2):
    """max |<F_u,F_u>|, |<F_v,F_v>| relative to max |<F_u,F_v>|."""
    I = induced_metric(imm, order)
    return float(max(np.abs(I[..., 0, 0]).max(), np.abs(I[..., 1, 1]).max()) / np.abs(I[..., 0, 1]).max())


def normal_orthogonality(imm, order=2):
    """max |<F_u, N>|, |<F_v, N>| for the stored normal."""
    P, Nc, a = imm.points, imm.normals, imm.ambient
    Pu, Pv = _fd.d_u(P, imm.grid.du, order), _fd.d_v(P, imm.grid.dv, order)
    return float(max(np.abs(lz.inner(Pu, Nc, a)).max(), np.abs(lz.inner(Pv, Nc, a)).max()))


# harmonicity ---------------------------------------------------------------

def harmonic_residual_field(phi, grid, c, order=2):
    """phi_uv - 2 c phi / (1 + c phi^2) phi_u phi_v."""
    phi = np.asarray(phi, dtype=float)
    den = 1.0 + c * phi ** 2
    if c != 0 and np.any(np.abs(den) < 1e-12):
        raise DegenerateError("1 + c phi^2 vanishes on the grid")
    pu = _fd.d_u(phi, grid.du, order)
    pv = _fd.d_v(phi, grid.dv, order)
    puv = _fd.d_uv(phi, grid.du, grid.dv, order)
    return puv - 2.0 * c * phi / den * pu * pv


def additive_fit(phi):
    """Least-squares fit phi ~ f(u) + g(v); returns (f, g, max residual)."""
    phi = np.asarray(phi, dtype=float)
    mean = phi.mean()
    f = phi.mean(axis=1) - mean
    g = phi.mean(axis=0)
    fit = f[:, None] + g[None, :]
    return f, g, float(np.abs(phi - fit).max())


def check_thimc(H, grid, c, order=2, width=1):
    """Harmonicity report for 1/H (with the additive fit when c = 0)."""
    H = np.asarray(H, dtype=float)
    if np.any(np.abs(H) < tol("H_floor")):
        raise DegenerateError("H vanishes on the grid")
    phi = 1.0 / H
    res = harmonic_residual_field(phi, grid, c, order)
    out = {"harmonic_residual": float(np.abs(_fd.interior(res, width)).max())}
    if c == 0:
        out["fit_residual"] = additive_fit(_fd.interior(phi, width))[2]
    return out


def report(imm, claimed=None, order=2, width=2):
    """Compare recomputed invariants of ``imm`` with optional claimed SurfaceData."""
    c = AMBIENT_C[imm.ambient]
    H, K = mean_and_gauss_curvature(imm, order)
    inner = lambda a: _fd.interior(np.asarray(a), width)
    out = {"ambient": imm.ambient, "quadric_defect": imm.quadric_defect(),
           "tangency_defect": tangency_defect(imm, order),
           "null_defect": null_defect(imm, order)}
    if imm.N is not None:
        out["normal_defect"] = imm.normal_defect()
        out["normal_orthogonality"] = normal_orthogonality(imm, order)
    out.update(check_thimc(inner(H), imm.grid, c, order, width=1)
               if min(H.shape) > 2 * width + 2 else {})
    if claimed is not None:
        omega, Q, R, _ = hopf_and_omega(imm, order)
        out["H_error"] = float(np.abs(inner(H - claimed.H)).max())
        out["omega_error"] = float(np.abs(inner(omega - claimed.omega)).max())
        out["Q_error"] = float(np.abs(inner(Q - claimed.Q)).max())
        out["R_error"] = float(np.abs(inner(R - claimed.R)).max())
    return out


# JSON verification report -----------------------------------------------------

def _converges(fine, coarse):
    """Pass when ``fine`` is below the residual floor or drops at ``min_order`` from ``coarse``."""
    if fine <= tol("residual_floor"):
        return True, None
    if coarse is None or fine <= 0:
        return False, None
    rate = float(np.log2(coarse / fine))
    return rate >= tol("min_order"), rate


def _halvable(grid):
    return (grid.nu - 1) % 2 == 0 and (grid.nv - 1) % 2 == 0 and min(grid.shape) >= 13


def _subsample_immersion(imm, step):
    from .sym import ImmersionGrid
    sl = (slice(None, None, step), slice(None, None, step))
    nrm = None if imm.N is None else imm.normals[sl]
    return ImmersionGrid.from_coords(imm.ambient, imm.grid.subsample(step), imm.points[sl], nrm,
                                     imm.meta)


def _oracle_errors(imm, data, order, width):
    H, K = mean_and_gauss_curvature(imm, order)
    omega, Q, R, sign = hopf_and_omega(imm, order)
    from .surface import gaussian_curvature
    inner = lambda a: float(np.abs(_fd.interior(np.asarray(a), width)).max())
    return {"H_error": inner(H - data.H), "omega_error": inner(omega - data.omega),
            "Q_error": inner(Q - data.Q), "R_error": inner(R - data.R),
            "K_error": inner(K - gaussian_curvature(data, order)),
            "orientation_ok": bool(np.all(sign == data.sign))}


def verification_report(data, imm=None, order=2, width=2, oracle_gate="order"):
    """Residuals, observed orders and pass flags for surface data (and its immersion).

    Checks: ``gauss_residual``, ``codazzi_residual``, ``thimc`` (harmonicity
    of 1/H into the model space of curvature c) and, with an immersion,
    ``oracle_H``, ``oracle_metric`` and ``oracle_hopf``.  Each check passes
    when its residual is below ``residual_floor`` or converges with observed
    order at least ``min_order`` under 2-subsampling.

    ``oracle_gate="h2"`` judges the oracle errors against the absolute bound
    ``residual_h2 * h^2 * scale`` instead.  Use it for immersions integrated
    on this grid: subsampling keeps their fine-grid integration error, so
    the observed order says nothing about convergence.
    """
    if oracle_gate not in ("order", "h2"):
        raise ValueError("oracle_gate must be 'order' or 'h2'")
    from .surface import residual_summary
    fine = residual_summary(data, order)
    coarse = residual_summary(data.subsample(2), order) if _halvable(data.grid) else None
    checks, orders = {}, {}
    ok_g, orders["gauss"] = _converges(fine["gauss"], coarse and coarse["gauss"])
    ok_u, orders["codazzi_u"] = _converges(fine["codazzi_u"], coarse and coarse["codazzi_u"])
    ok_v, orders["codazzi_v"] = _converges(fine["codazzi_v"], coarse and coarse["codazzi_v"])
    checks["gauss_residual"] = ok_g
    checks["codazzi_residual"] = ok_u and ok_v
    residuals = {k: fine[k] for k in ("gauss", "codazzi_u", "codazzi_v")}
    harm = lambda s: float(np.abs(_fd.interior(harmonic_residual_field(1.0 / s.H, s.grid, s.c, order),
                                                width)).max())
    residuals["harmonic"] = harm(data)
    ok_h, orders["harmonic"] = _converges(residuals["harmonic"],
                                          harm(data.subsample(2)) if coarse else None)
    checks["thimc"] = ok_h
    out = {"max_residuals": residuals, "convergence_orders": orders}
    if imm is not None:
        ef = _oracle_errors(imm, data, order, width)
        ec = (_oracle_errors(_subsample_immersion(imm, 2), data.subsample(2), order, width)
              if _halvable(data.grid) else None)
        out["oracle"] = ef
        h = max(data.grid.du, data.grid.dv)
        scale = max(1.0, *(float(np.max(np.abs(getattr(data, k)))) for k in ("H", "Q", "R")))
        bound = tol("residual_h2") * h ** 2 * scale
        for name, keys in (("oracle_H", ("H_error",)), ("oracle_metric", ("omega_error",)),
                           ("oracle_hopf", ("Q_error", "R_error"))):
            ok = True
            for k in keys:
                passed, rate = _converges(ef[k], ec and ec[k])
                orders[k] = rate
                if oracle_gate == "h2":
                    passed = ef[k] <= bound
                ok = ok and passed
            checks[name] = ok
        if oracle_gate == "h2":
            out["oracle_bound"] = bound
        checks["oracle_metric"] = checks["oracle_metric"] and ef["orientation_ok"]
        out["quadric_defect"] = imm.quadric_defect()
    out["checks"] = checks
    out["failed"] = sorted(k for k, v in checks.items() if not v)
    out["pass"] = not out["failed"]
    return out
