"""Lax matrices with variable spectral parameter and frame integration.

The frame solves ``Phi_u = Phi U``, ``Phi_v = Phi V``.  ``build_lax`` gives
the single-parameter pair of a Minkowski surface whose inverse mean
curvature splits as f(u) + g(v); ``build_lax_two_param`` gives the pair with
two spectral functions used for the anti de Sitter and de Sitter families.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _fd
from ._march import march_certified
from .config import tol
from .errors import (InvariantError, PathDependenceWarning, PoleError,
                     ZeroCurvatureWarning)
from .lorentz import det2, renormalize


def _pole_nodes(den, eps=1e-14):
    return [tuple(np.atleast_1d(k)) for k in np.argwhere(np.abs(np.atleast_1d(den)) <= eps)]


def spectral_lambda(f, g, tau):
    """lambda = (1 - 2 tau g) / (1 + 2 tau f), broadcast over f and g."""
    f, g = np.asarray(f), np.asarray(g)
    den = 1.0 + 2.0 * tau * f
    nodes = _pole_nodes(den)
    if nodes:
        raise PoleError("spectral parameter pole 1 + 2 tau f = 0", nodes)
    out = (1.0 - 2.0 * tau * g) / den
    return out[()] if np.ndim(out) == 0 else out


def spectral_lambda_nu(f, g, tau, c, convention="uncorrected"):
    """The pair (lambda(u), nu(v)) of the two-parameter Lax pair.

    ``convention="uncorrected"``:
        lambda = tau (1 - c f^2) / (tau^2 - c f^2), nu likewise in g.
    ``convention="compatible"``:
        lambda = tau (1 + c f^2) / (1 + c tau^2 f^2),
        nu = tau (1 + c g^2) / (tau^2 + c g^2).
    Only the second choice makes the two-parameter pair flat for every tau
    (see ``build_lax_two_param``).
    """
    f, g = np.asarray(f, dtype=np.result_type(f, tau, float)), np.asarray(g)
    if convention == "uncorrected":
        num_l, den_l = tau * (1 - c * f ** 2), tau ** 2 - c * f ** 2
        num_n, den_n = tau * (1 - c * g ** 2), tau ** 2 - c * g ** 2
    elif convention == "compatible":
        num_l, den_l = tau * (1 + c * f ** 2), 1 + c * tau ** 2 * f ** 2
        num_n, den_n = tau * (1 + c * g ** 2), tau ** 2 + c * g ** 2
    else:
        raise ValueError(f"unknown convention {convention!r}")
    for den, name in ((den_l, "lambda"), (den_n, "nu")):
        nodes = _pole_nodes(den)
        if nodes:
            raise PoleError(f"{name} has a pole", nodes)
    lam, nu = num_l / den_l, num_n / den_n
    unwrap = lambda a: a[()] if np.ndim(a) == 0 else a
    return unwrap(lam), unwrap(nu)


def deformed_H(f, g, tau, c):
    """H[tau] = (tau f + g / tau) / (1 - c f g) on the (u, v) grid."""
    if tau == 0:
        raise PoleError("tau = 0 is not allowed", [])
    F, G = np.meshgrid(f, g, indexing="ij")
    den = 1.0 - c * F * G
    nodes = _pole_nodes(den)
    if nodes:
        raise PoleError("1 - c f g vanishes", nodes)
    return (tau * F + G / tau) / den


@dataclass(frozen=True)
class LaxPairField:
    """Per-node Lax matrices U, V with optional tau-derivatives dU, dV."""
    grid: object
    U: np.ndarray
    V: np.ndarray
    tau: complex
    variant: str = "single"
    dU: np.ndarray = None
    dV: np.ndarray = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for M in (self.U, self.V):
            if M.shape != self.grid.shape + (2, 2):
                raise InvariantError("Lax matrices must have shape (nu, nv, 2, 2)")
            if np.max(np.abs(M[..., 0, 0] + M[..., 1, 1])) > 1e-12:
                raise InvariantError("Lax matrices must be traceless")


def _omega_derivs(s, order):
    return _fd.d_u(s.omega, s.grid.du, order), _fd.d_v(s.omega, s.grid.dv, order)


def _assemble(wu, wv, Q, R, low_u, up_v, e):
    dtype = np.result_type(low_u, up_v, float)
    U = np.zeros(wu.shape + (2, 2), dtype=dtype)
    V = np.zeros_like(U)
    U[..., 0, 0], U[..., 1, 1] = -wu / 4, wu / 4
    U[..., 0, 1] = -Q / np.sqrt(e)
    U[..., 1, 0] = low_u
    V[..., 0, 0], V[..., 1, 1] = wv / 4, -wv / 4
    V[..., 0, 1] = up_v
    V[..., 1, 0] = R / np.sqrt(e)
    return U, V


def build_lax(s, tau, order=4):
    """Single-parameter Lax pair of Minkowski data with 1/H = f + g.

    Lower-left of U is (H/2) lambda e^{omega/2}; upper-right of V is
    -(H/2) lambda^{-1} e^{omega/2}.  The tau-derivatives of U and V are
    stored as well, for use by the Sym formula.
    """
    if s.c != 0 or s.f is None:
        raise InvariantError("build_lax needs c = 0 data with a splitting f, g")
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    lam = spectral_lambda(F, G, tau)
    inv_den = 1.0 - 2.0 * tau * G
    nodes = _pole_nodes(inv_den)
    if nodes:
        raise PoleError("spectral parameter pole 1 - 2 tau g = 0", nodes)
    wu, wv = _omega_derivs(s, order)
    e = np.exp(s.omega)
    half = np.sqrt(e)
    U, V = _assemble(wu, wv, s.Q, s.R, 0.5 * s.H * lam * half, -0.5 * s.H / lam * half, e)
    dU = np.zeros_like(U)
    dV = np.zeros_like(V)
    dU[..., 1, 0] = -half / (1.0 + 2.0 * tau * F) ** 2
    dV[..., 0, 1] = -half / inv_den ** 2
    return LaxPairField(s.grid, U, V, tau, "single", dU, dV)


def build_lax_two_param(s, tau, c=None, order=4, convention="compatible"):
    """Two-parameter Lax pair for data in the de Sitter or anti de Sitter case.

    Lower-left of U is (H[tau] + c) lambda e^{omega/2} / 2, upper-right of V
    is -(H[tau] - c) nu e^{omega/2} / 2.
    """
    c = s.c if c is None else c
    if c not in (1, -1) or s.f is None or s.split_form != "ratio":
        raise InvariantError("build_lax_two_param needs c = +-1 data with a ratio splitting "
                             "H = (f+g)/(1-cfg)")
    if tau == 0:
        raise PoleError("tau = 0 is not allowed", [])
    Ht = deformed_H(s.f, s.g, tau, c)
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    lam, nu = spectral_lambda_nu(F, G, tau, c, convention)
    wu, wv = _omega_derivs(s, order)
    e = np.exp(s.omega)
    half = np.sqrt(e)
    U, V = _assemble(wu, wv, s.Q, s.R, 0.5 * (Ht + c) * lam * half,
                     -0.5 * (Ht - c) * nu * half, e)
    return LaxPairField(s.grid, U, V, tau, "two_param", meta={"convention": convention, "c": c})


def zero_curvature_residual(L, order=2):
    """dV/du - dU/dv + [U, V] per node."""
    Vu = _fd.d_u(L.V, L.grid.du, order)
    Uv = _fd.d_v(L.U, L.grid.dv, order)
    return Vu - Uv + L.U @ L.V - L.V @ L.U


def zero_curvature_max(L, order=2, width=1):
    r = zero_curvature_residual(L, order)
    return float(np.abs(_fd.interior(r, width)).max())


def subsample_lax(L, step):
    sl = (slice(None, None, step), slice(None, None, step))
    sub = lambda a: None if a is None else a[sl]
    return LaxPairField(L.grid.subsample(step), L.U[sl], L.V[sl], L.tau, L.variant,
                        sub(L.dU), sub(L.dV), dict(L.meta))


def flatness_ok(L):
    """True when the zero-curvature residual is below the floor, converges at
    the minimum order under 2-subsampling, or (for grids that cannot be
    halved) is below ``zero_curvature_h2 * h^2 * scale``."""
    fine = zero_curvature_max(L)
    if fine <= tol("residual_floor"):
        return True
    g = L.grid
    if (g.nu - 1) % 2 == 0 and (g.nv - 1) % 2 == 0 and min(g.shape) >= 9:
        coarse = zero_curvature_max(subsample_lax(L, 2))
        return bool(np.log2(coarse / fine) >= tol("min_order"))
    scale = max(1.0, float(np.abs(L.U).max()), float(np.abs(L.V).max()))
    return fine <= tol("zero_curvature_h2") * max(g.du, g.dv) ** 2 * scale


@dataclass(frozen=True)
class FrameField:
    grid: object
    phi: np.ndarray
    tau: complex
    dphi: np.ndarray = None
    path_discrepancy: float = 0.0
    path_location: tuple = (0, 0)
    variant: str = "single"

    def det_drift(self):
        return float(np.max(np.abs(det2(self.phi) - 1.0)))

    def to_dict(self):
        flat = self.phi.reshape(self.grid.nu, self.grid.nv, 4)
        if np.iscomplexobj(flat):
            flat = np.concatenate([flat.real, flat.imag], axis=-1)
        tau = complex(self.tau)
        return {"grid": self.grid.to_dict(), "tau": [tau.real, tau.imag],
                "phi": flat.tolist(), "path_discrepancy": self.path_discrepancy}


def _frame_rhs(state, coef):
    if len(state) == 1:
        return [state[0] @ coef[0]]
    phi, dphi = state
    M, dM = coef
    return [phi @ M, dphi @ M + phi @ dM]


def _renorm(state):
    phi = state[0]
    d = det2(phi)
    s = 1.0 / (np.sqrt(d.astype(complex)) if np.iscomplexobj(phi) else np.sqrt(d))
    return [a * s[..., None, None] for a in state]


def integrate_frame(L, phi0=None, with_derivative=None, check_flatness=True):
    """Integrate the frame over the grid with the two-pass RK4 march.

    ``phi0`` defaults to the identity.  When tau-derivatives are present in
    ``L`` the variational system is integrated too (initial value zero).
    A path-dependence warning is issued when the two march orders differ by
    more than ``path_h2 * h^2`` relative to the frame size.
    """
    h = max(L.grid.du, L.grid.dv)
    if check_flatness and not flatness_ok(L):
        warnings.warn(f"zero-curvature residual {zero_curvature_max(L):.3e} does not "
                      "converge on this grid", ZeroCurvatureWarning, stacklevel=2)
    dtype = np.result_type(L.U, float)
    phi0 = np.eye(2, dtype=dtype) if phi0 is None else np.asarray(phi0, dtype=dtype)
    if abs(det2(phi0) - 1.0) > tol("det"):
        phi0 = renormalize(phi0)
    with_derivative = L.dU is not None if with_derivative is None else with_derivative
    if with_derivative:
        y0 = [phi0, np.zeros_like(phi0)]
        cu, cv = [L.U, L.dU], [L.V, L.dV]
    else:
        y0, cu, cv = [phi0], [L.U], [L.V]
    states, disc, loc = march_certified(_frame_rhs, y0, cu, cv, L.grid.du, L.grid.dv, _renorm)
    phi = states[0]
    scale = max(1.0, float(np.abs(phi).max()))
    if disc > tol("path_h2") * h ** 2 * scale:
        warnings.warn(f"path-dependence discrepancy {disc:.3e} at node {loc}",
                      PathDependenceWarning, stacklevel=2)
    drift = float(np.max(np.abs(det2(phi) - 1.0)))
    if drift > tol("frame_det"):
        raise InvariantError(f"frame determinant drift {drift:.3e}")
    return FrameField(L.grid, phi, L.tau, states[1] if with_derivative else None,
                      disc, loc, L.variant)
