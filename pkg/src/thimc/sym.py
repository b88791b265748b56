"""Immersions built from integrated frames.

* ``sym_e31``: F = -(dPhi/dtau) Phi^{-1} in Minkowski space, normal Ad(Phi) K.
* ``immersion_h31``: F = Phi[tau] Phi[-tau]^{-1} in anti de Sitter space.
* ``immersion_s31``: F = Phi i' Phi* in de Sitter space for an imaginary
  spectral value.
"""
import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import lorentz as lz
from .config import tol
from .errors import DegenerateError, InvariantError, PoleError
from .lax import (build_lax, build_lax_two_param, integrate_frame)
from .surface import SurfaceData


@dataclass(frozen=True)
class ImmersionGrid:
    """Ambient points F and unit normals N (both as 2x2 matrices) per node."""
    ambient: str
    grid: object
    F: np.ndarray
    N: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.ambient not in lz.METRICS:
            raise InvariantError(f"unknown ambient {self.ambient!r}")

    @property
    def points(self):
        return lz.coords(self.F, self.ambient)

    @property
    def normals(self):
        return None if self.N is None else lz.coords(self.N, self.ambient)

    @classmethod
    def from_coords(cls, ambient, grid, P, Nc=None, meta=None):
        return cls(ambient, grid, lz.from_coords(P, ambient),
                   None if Nc is None else lz.from_coords(Nc, ambient), dict(meta or {}))

    def quadric_defect(self):
        """Largest violation of the ambient constraint (trace, det or Hermiticity)."""
        if self.ambient == "E31":
            return float(np.max(np.abs(lz.trace2(self.F))))
        d = lz.det2(self.F)
        if self.ambient == "H31":
            return float(np.max(np.abs(d - 1.0)))
        herm = float(np.max(np.abs(self.F - lz.dagger(self.F))))
        return max(float(np.max(np.abs(d + 1.0))), herm)

    def normal_defect(self):
        Nc = self.normals
        return float(np.max(np.abs(lz.inner(Nc, Nc, self.ambient) - 1.0)))

    def check(self, eps=None):
        eps = tol("immersion_det") if eps is None else eps
        q, n = self.quadric_defect(), self.normal_defect()
        if q > eps or n > eps:
            raise InvariantError(f"immersion off its quadric ({q:.2e}) or normal not unit ({n:.2e})")
        return q, n

    # export --------------------------------------------------------------
    def chart(self, matrix=None):
        """3D vertices for meshing: E31 coordinates or a linear chart of the 4-vector."""
        P = self.points
        if self.ambient == "E31" and matrix is None:
            return P
        if matrix is None:
            matrix = np.eye(4)[1:]
        return P @ np.asarray(matrix, float).T

    def to_obj(self, path, chart=None):
        verts = self.chart(chart).reshape(-1, 3)
        nu, nv = self.grid.shape
        with open(path, "w") as fh:
            fh.write(f"# {self.ambient} immersion, {nu}x{nv} nodes\n")
            for p in verts:
                fh.write("v " + " ".join(repr(float(x)) for x in p) + "\n")
            for i in range(nu - 1):
                for j in range(nv - 1):
                    a = i * nv + j + 1
                    b, c_, d = a + nv, a + nv + 1, a + 1
                    fh.write(f"f {a} {b} {c_}\nf {a} {c_} {d}\n")

    def to_csv(self, path):
        P, Nc = self.points, self.normals
        k = P.shape[-1]
        offset = 4 - k
        U, V = self.grid.mesh()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v"] + [f"p{i}" for i in range(4)] + [f"n{i}" for i in range(4)])
            for i in range(self.grid.nu):
                for j in range(self.grid.nv):
                    p = [0.0] * offset + P[i, j].tolist()
                    n = [0.0] * offset + (Nc[i, j].tolist() if Nc is not None else [0.0] * k)
                    w.writerow([repr(float(x)) for x in [U[i, j], V[i, j]] + p + n])

    def to_dict(self):
        return {"ambient": self.ambient, "grid": self.grid.to_dict(),
                "points": self.points.tolist(),
                "normals": None if self.N is None else self.normals.tolist(),
                "meta": self.meta}

    @classmethod
    def from_dict(cls, d):
        from .surface import NullGrid
        Nc = None if d.get("normals") is None else np.array(d["normals"], float)
        return cls.from_coords(d["ambient"], NullGrid(**d["grid"]), np.array(d["points"], float),
                               Nc, d.get("meta"))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)


def sym_e31(frame):
    """Sym formula F = -(dPhi/dtau) Phi^{-1} with normal Ad(Phi) K.

    The trace of F vanishes analytically; any numerical trace is removed and
    its size recorded in ``meta["trace_removed"]``.
    """
    if frame.dphi is None:
        raise InvariantError("the Sym formula needs the tau-derivative of the frame")
    phi = frame.phi
    F = -frame.dphi @ lz.inv2(phi)
    tr = lz.trace2(F)
    F = F - 0.5 * tr[..., None, None] * np.eye(2)
    N = phi @ lz.BASIS_K @ lz.inv2(phi)
    return ImmersionGrid("E31", frame.grid, np.real_if_close(F), np.real_if_close(N),
                         {"tau": complex(frame.tau).real, "trace_removed": float(np.max(np.abs(tr)))})


def immersion_h31(frame_plus, frame_minus):
    """F = Phi[tau] Phi[-tau]^{-1} with normal -Phi[tau] K Phi[-tau]^{-1}."""
    if frame_plus.tau == 0:
        raise PoleError("tau = 0 gives a constant map", [])
    if frame_plus.grid != frame_minus.grid:
        raise InvariantError("frames live on different grids")
    a, b = np.real(frame_plus.phi), np.real(frame_minus.phi)
    binv = lz.inv2(b)
    F = a @ binv
    N = -(a @ lz.BASIS_K @ binv)
    drift = float(np.max(np.abs(lz.det2(F) - 1.0)))
    if drift > tol("immersion_det"):
        raise InvariantError(f"det F drifted by {drift:.3e}")
    return ImmersionGrid("H31", frame_plus.grid, F, N, {"tau": float(np.real(frame_plus.tau))})


def immersion_s31(frame, normal_sign=-1):
    """F = Phi i' Phi* with normal ``normal_sign`` * Phi j' Phi*."""
    phi = np.asarray(frame.phi, dtype=complex)
    F = phi @ lz.I_PRIME @ lz.dagger(phi)
    N = normal_sign * (phi @ lz.BASIS_J @ lz.dagger(phi))
    herm = float(np.max(np.abs(F - lz.dagger(F))))
    if herm > tol("quadric"):
        raise InvariantError(f"de Sitter point not Hermitian ({herm:.3e})")
    F = 0.5 * (F + lz.dagger(F))
    N = 0.5 * (N + lz.dagger(N))
    return ImmersionGrid("S31", frame.grid, F, N,
                         {"tau": float(np.imag(frame.tau)), "normal_sign": normal_sign})


# convenience pipelines -------------------------------------------------------

def sym_surface(s, tau, phi0=None, order=4):
    """Minkowski immersion of the deformed surface at real ``tau``."""
    return sym_e31(integrate_frame(build_lax(s, tau, order), phi0))


def h31_surface(s, tau, phi0=None, order=4, two_param=False, convention="compatible"):
    """Anti de Sitter immersion from the frames at +tau and -tau."""
    if two_param:
        Lp = build_lax_two_param(s, tau, -1, order, convention)
        Lm = build_lax_two_param(s, -tau, -1, order, convention)
    else:
        Lp, Lm = build_lax(s, tau, order), build_lax(s, -tau, order)
    fp = integrate_frame(Lp, phi0, with_derivative=False)
    fm = integrate_frame(Lm, phi0, with_derivative=False)
    return immersion_h31(fp, fm)


def s31_surface(s, tau, phi0=None, order=4, two_param=False, convention="compatible",
                normal_sign=None):
    """De Sitter immersion from the frame at the imaginary value i*tau."""
    if two_param:
        L = build_lax_two_param(s, 1j * tau, None, order, convention)
        normal_sign = 1 if normal_sign is None else normal_sign
    else:
        L = build_lax(s, 1j * tau, order)
        normal_sign = -1 if normal_sign is None else normal_sign
    return immersion_s31(integrate_frame(L, phi0, with_derivative=False), normal_sign)


# deformed fundamental quantities -------------------------------------------------

def _deform_factors(s, tau):
    if s.c != 0 or s.f is None:
        raise InvariantError("deformation needs c = 0 data with a splitting")
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    a, b = 1.0 + 2.0 * tau * F, 1.0 - 2.0 * tau * G
    bad = np.argwhere((np.abs(a) < 1e-14) | (np.abs(b) < 1e-14))
    if len(bad):
        raise PoleError("deformation crosses a pole", bad)
    sa = np.sign(a)
    sb = np.sign(b)
    if np.ptp(sa) or np.ptp(sb):
        nodes = np.argwhere((sa != sa.flat[0]) | (sb != sb.flat[0]))
        raise PoleError("deformation factor changes sign on the grid", nodes)
    return a, b


def deformed_quantities(s, tau):
    """Fundamental data of the member ``tau`` of the Minkowski family.

    e^{omega'} = e^omega / (a b)^2, Q' = Q / a^2, R' = R / b^2,
    f' = f / (1 + 2 tau f), g' = g / (1 - 2 tau g), H' = 1 / (f' + g') = a b H
    with a = 1 + 2 tau f and b = 1 - 2 tau g.
    """
    a, b = _deform_factors(s, tau)
    f2 = s.f / (1.0 + 2.0 * tau * s.f)
    g2 = s.g / (1.0 - 2.0 * tau * s.g)
    omega = s.omega - 2.0 * np.log(np.abs(a * b))
    H = 1.0 / (f2[:, None] + g2[None, :])
    return SurfaceData(s.grid, omega, s.Q / a ** 2, s.R / b ** 2, H, 0, f2, g2,
                       isothermal=s.isothermal, meta={"tau": tau})


def deformed_curvature(s, K, tau):
    """Gaussian curvature of the member ``tau``: K' = (a b)^2 K."""
    a, b = _deform_factors(s, tau)
    return (a * b) ** 2 * np.asarray(K)


def family_metric_h31(s, tau, c=-1):
    """Conformal factor G with I(u_, v_) = G of the de Sitter / anti de Sitter family."""
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    return 2.0 * tau ** 2 * np.exp(s.omega) / ((1 + 4 * c * tau ** 2 * F ** 2) * (1 + 4 * c * tau ** 2 * G ** 2))


def family_mean_curvature(s, tau, c=-1):
    """(1 - 4 c tau^2 f g) / (2 tau (f + g))."""
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    return (1 - 4 * c * tau ** 2 * F * G) / (2 * tau * (F + G))


def two_param_metric(s, tau, ambient):
    """Conformal factor G = I(d_u, d_v) of the two-parameter surfaces (c = -1 data).

    H31: G = lambda nu e^omega / 2 with the compatible spectral functions.
    S31 (imaginary value i tau): G = 2 Im(A) Im(B) where A, B are the
    off-diagonal Lax entries, which simplifies to
    -tau^2 (1 - f^2)(1 - g^2) e^omega / (2 (1 + tau^2 f^2)(tau^2 + g^2)).
    The sign is negative when |f|, |g| < 1: (u, v) are then anti isothermal.
    """
    from .lax import spectral_lambda_nu
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    e = np.exp(s.omega)
    if ambient == "H31":
        lam, nu = spectral_lambda_nu(F, G, tau, -1, "compatible")
        return 0.5 * lam * nu * e
    if ambient == "S31":
        return -tau ** 2 * (1 - F ** 2) * (1 - G ** 2) * e / (2 * (1 + tau ** 2 * F ** 2) * (tau ** 2 + G ** 2))
    raise ValueError(ambient)


def two_param_mean_curvature(s, tau, ambient):
    """H31: H[tau] = (tau f + g/tau)/(1 + f g).  S31 (normal +Psi j' Psi*):
    -(tau f - g/tau)/(1 + f g), i.e. c times the complexified formula."""
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    if ambient == "H31":
        return (tau * F + G / tau) / (1 + F * G)
    if ambient == "S31":
        return -(tau * F - G / tau) / (1 + F * G)
    raise ValueError(ambient)
