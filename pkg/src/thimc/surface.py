"""Gauss-Codazzi state of a timelike surface on a null-coordinate grid.

The metric is ``I = e^omega du dv`` (orientation ``"standard"``) or
``I = -e^omega du dv`` (orientation ``"anti"``).  Q and R are the Hopf
differentials and H the mean curvature; c is the ambient curvature.
"""
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import _fd
from .config import tol
from .errors import DegenerateError, InvariantError

ORIENTATIONS = ("standard", "anti")
# How the splitting (f, g) produces H when c = +-1.  For c = 0 always 1/H = f + g.
SPLIT_FORMS = ("inverse_ratio", "ratio")


@dataclass(frozen=True)
class NullGrid:
    u0: float
    v0: float
    du: float
    dv: float
    nu: int
    nv: int

    def __post_init__(self):
        if not (self.du > 0 and self.dv > 0):
            raise InvariantError("grid spacings must be positive")
        if self.nu < 3 or self.nv < 3:
            raise InvariantError("grid needs at least 3 nodes per direction")

    @classmethod
    def from_bounds(cls, u_range, v_range, nu, nv=None):
        nv = nu if nv is None else nv
        return cls(float(u_range[0]), float(v_range[0]),
                   (u_range[1] - u_range[0]) / (nu - 1),
                   (v_range[1] - v_range[0]) / (nv - 1), int(nu), int(nv))

    @property
    def u(self):
        return self.u0 + self.du * np.arange(self.nu)

    @property
    def v(self):
        return self.v0 + self.dv * np.arange(self.nv)

    @property
    def shape(self):
        return (self.nu, self.nv)

    def mesh(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    def subsample(self, step):
        """Every ``step``-th node; used for convergence estimates."""
        return NullGrid(self.u0, self.v0, self.du * step, self.dv * step,
                        (self.nu - 1) // step + 1, (self.nv - 1) // step + 1)

    def to_dict(self):
        return {"u0": self.u0, "v0": self.v0, "du": self.du, "dv": self.dv,
                "nu": self.nu, "nv": self.nv}


@dataclass(frozen=True)
class SurfaceData:
    grid: NullGrid
    omega: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    H: np.ndarray
    c: float = 0
    f: np.ndarray = None
    g: np.ndarray = None
    isothermal: str = "standard"
    split_form: str = "inverse_ratio"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        shape = self.grid.shape
        for name in ("omega", "Q", "R", "H"):
            arr = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), shape).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise DegenerateError(f"{name} is not finite at {int(np.sum(~np.isfinite(arr)))} nodes")
        if self.split_form not in SPLIT_FORMS:
            raise InvariantError(f"split_form must be one of {SPLIT_FORMS}")
        if self.isothermal not in ORIENTATIONS:
            raise InvariantError(f"isothermal must be one of {ORIENTATIONS}")
        small = np.argwhere(np.abs(self.H) < tol("H_floor"))
        if len(small):
            raise DegenerateError(f"H vanishes at {len(small)} nodes, first {tuple(small[0])}")
        if (self.f is None) != (self.g is None):
            raise InvariantError("splitting needs both f and g")
        if self.f is not None:
            f = np.asarray(self.f, dtype=float).reshape(self.grid.nu)
            g = np.asarray(self.g, dtype=float).reshape(self.grid.nv)
            object.__setattr__(self, "f", f)
            object.__setattr__(self, "g", g)
            err = splitting_error(self)
            if err > tol("splitting") * max(1.0, float(np.max(np.abs(self.H)))):
                raise InvariantError(f"splitting does not reproduce H (error {err:.3e})")

    @property
    def sign(self):
        return 1.0 if self.isothermal == "standard" else -1.0

    def with_fields(self, **kw):
        return replace(self, **kw)

    def subsample(self, step):
        sl = (slice(None, None, step), slice(None, None, step))
        grid = self.grid.subsample(step)
        n = (grid.nu, grid.nv)
        cut = lambda a: np.asarray(a)[sl][: n[0], : n[1]]
        f = None if self.f is None else self.f[::step][: n[0]]
        g = None if self.g is None else self.g[::step][: n[1]]
        return SurfaceData(grid, cut(self.omega), cut(self.Q), cut(self.R), cut(self.H),
                           self.c, f, g, self.isothermal, self.split_form, dict(self.meta))

    # serialisation -------------------------------------------------------
    def to_dict(self):
        d = {"grid": self.grid.to_dict(), "omega": self.omega.tolist(),
             "Q": self.Q.tolist(), "R": self.R.tolist(), "H": self.H.tolist(),
             "c": self.c, "f": None if self.f is None else self.f.tolist(),
             "g": None if self.g is None else self.g.tolist(),
             "isothermal": self.isothermal, "split_form": self.split_form}
        if self.meta:
            d["meta"] = self.meta
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            grid = NullGrid(**d["grid"])
            return cls(grid, np.array(d["omega"], float), np.array(d["Q"], float),
                       np.array(d["R"], float), np.array(d["H"], float), d["c"],
                       None if d.get("f") is None else np.array(d["f"], float),
                       None if d.get("g") is None else np.array(d["g"], float),
                       d.get("isothermal", "standard"), d.get("split_form", "inverse_ratio"),
                       dict(d.get("meta", {})))
        except (KeyError, TypeError) as exc:
            raise InvariantError(f"malformed surface document: {exc}") from exc

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def split_H(f, g, c, form="inverse_ratio"):
    """Mean curvature from a splitting.

    1/(f+g) for c=0; (1-cfg)/(f+g) (``inverse_ratio``) or (f+g)/(1-cfg)
    (``ratio``) for c=+-1.
    """
    F, G = np.meshgrid(np.asarray(f, float), np.asarray(g, float), indexing="ij")
    if c != 0 and form == "ratio":
        return (F + G) / (1.0 - c * F * G)
    return (1.0 - c * F * G) / (F + G)


def splitting_error(s):
    if s.f is None:
        return 0.0
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    if s.c == 0:
        return float(np.max(np.abs(1.0 / s.H - (F + G))))
    if s.split_form == "ratio":
        return float(np.max(np.abs(s.H * (1.0 - s.c * F * G) - (F + G))))
    return float(np.max(np.abs(s.H * (F + G) - (1.0 - s.c * F * G))))


@dataclass(frozen=True)
class IsothermicStructure:
    """Hopf factorisation Q = (q+theta) rho / 2, R = eps (q-theta) sigma / 2."""
    eps: int
    theta: float
    q: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise InvariantError("eps must be +1 or -1")
        if np.any(np.asarray(self.rho) <= 0) or np.any(np.asarray(self.sigma) <= 0):
            raise InvariantError("rho and sigma must be positive")

    def hopf(self):
        rho = np.asarray(self.rho)[:, None]
        sigma = np.asarray(self.sigma)[None, :]
        Q = 0.5 * (self.q + self.theta) * rho
        R = 0.5 * self.eps * (self.q - self.theta) * sigma
        return Q, R

    @staticmethod
    def recover_q(Q, R, rho, sigma, eps):
        """q from the Hopf differentials: (Q/rho + eps R/sigma)."""
        return np.asarray(Q) / np.asarray(rho)[:, None] + eps * np.asarray(R) / np.asarray(sigma)[None, :]

    def check(self, s, eps=None):
        """Largest deviation between the factorisation and the Hopf fields of ``s``."""
        eps = tol("isothermic") if eps is None else eps
        Q, R = self.hopf()
        err = max(float(np.max(np.abs(Q - s.Q))), float(np.max(np.abs(R - s.R))))
        if err > eps * max(1.0, float(np.max(np.abs(s.Q))), float(np.max(np.abs(s.R)))):
            raise InvariantError(f"isothermic factorisation mismatch {err:.3e}")
        return err


# residuals ---------------------------------------------------------------

def gauss_residual(s, order=2):
    """omega_uv + sign*((H^2+c)/2 e^omega - 2QR e^-omega) per node.

    ``sign`` is -1 for anti isothermal coordinates.
    """
    w_uv = _fd.d_uv(s.omega, s.grid.du, s.grid.dv, order)
    e = np.exp(s.omega)
    return w_uv + s.sign * (0.5 * (s.H ** 2 + s.c) * e - 2.0 * s.Q * s.R / e)


def codazzi_residual(s, order=2):
    """(H_u - 2 sign e^-omega Q_v, H_v - 2 sign e^-omega R_u)."""
    e = np.exp(-s.omega)
    Hu = _fd.d_u(s.H, s.grid.du, order)
    Hv = _fd.d_v(s.H, s.grid.dv, order)
    Qv = _fd.d_v(s.Q, s.grid.dv, order)
    Ru = _fd.d_u(s.R, s.grid.du, order)
    return Hu - 2.0 * s.sign * e * Qv, Hv - 2.0 * s.sign * e * Ru


def gaussian_curvature(s, order=2):
    """K = -2 sign omega_uv e^-omega."""
    return -2.0 * s.sign * _fd.d_uv(s.omega, s.grid.du, s.grid.dv, order) * np.exp(-s.omega)


def discriminant(s):
    """4 e^{-2 omega} Q R, which equals H^2 - K + c on solutions."""
    return 4.0 * np.exp(-2.0 * s.omega) * s.Q * s.R


def discriminant_defect(s, order=2):
    """|(H^2 - K + c) - 4 e^{-2 omega} QR| per node."""
    return np.abs(s.H ** 2 - gaussian_curvature(s, order) + s.c - discriminant(s))


def residual_summary(s, order=2, width=1):
    """Max-norm residuals split into interior and boundary parts."""
    gr = gauss_residual(s, order)
    cu, cv = codazzi_residual(s, order)
    out = {}
    for name, arr in (("gauss", gr), ("codazzi_u", cu), ("codazzi_v", cv)):
        interior = np.abs(_fd.interior(arr, width))
        mask = np.ones(arr.shape, bool)
        mask[width:-width, width:-width] = False
        out[name] = float(interior.max())
        out[name + "_boundary"] = float(np.abs(arr[mask]).max())
    return out


def convergence_orders(s, order=2, steps=(4, 2, 1)):
    """Observed orders of the interior residuals from nested subsamplings of ``s``."""
    sizes = [residual_summary(s.subsample(k), order) for k in steps]
    hs = [s.grid.du * k for k in steps]
    orders = {}
    for key in ("gauss", "codazzi_u", "codazzi_v"):
        e = np.array([r[key] for r in sizes])
        with np.errstate(divide="ignore", invalid="ignore"):
            orders[key] = (np.log(e[:-1] / e[1:]) / np.log(np.array(hs[:-1]) / np.array(hs[1:]))).tolist()
    return sizes, orders


def gauss_codazzi_gate(s, order=2):
    """Pass/fail decision for the Gauss-Codazzi residuals of discrete data.

    Passes when the worst interior residual is below ``residual_floor`` or
    when every residual component above the floor converges with observed
    order at least ``min_order`` between the grid and its 2-subsample.  When
    the grid cannot be halved, the bound ``residual_h2 * h^2 * scale`` is used.
    """
    fine = residual_summary(s, order)
    keys = ("gauss", "codazzi_u", "codazzi_v")
    worst = max(fine[k] for k in keys)
    out = {"residuals": fine, "worst": worst, "orders": {}}
    if worst <= tol("residual_floor"):
        out["pass"] = True
        return out
    if (s.grid.nu - 1) % 2 == 0 and (s.grid.nv - 1) % 2 == 0 and min(s.grid.shape) >= 9:
        coarse = residual_summary(s.subsample(2), order)
        ok = True
        for k in keys:
            if fine[k] <= tol("residual_floor"):
                continue
            rate = float(np.log2(coarse[k] / fine[k])) if fine[k] > 0 else float("inf")
            out["orders"][k] = rate
            ok = ok and rate >= tol("min_order")
        out["pass"] = ok
        return out
    h = max(s.grid.du, s.grid.dv)
    scale = max(1.0, float(np.max(np.abs(s.H))), float(np.max(np.abs(s.Q))),
                float(np.max(np.abs(s.R))))
    out["pass"] = worst <= tol("residual_h2") * h ** 2 * scale
    return out
