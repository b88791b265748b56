"""Example THIMC surfaces in Minkowski space.

* cylinders over Euclidean and timelike plane curves with curvature
  1/(C1 s + C2);
* B-scrolls over null Frenet curves;
* surfaces of revolution about spacelike, timelike and null axes, built
  from profile data (omega, c) or (a, b);
* profile generators: Painleve-III type equations for 1/H = coordinate and
  the null-axis equation solved both as an ODE and by quadrature.

Surfaces of revolution use ``x`` along the rotation orbits for spacelike
axes with Euclidean profile, and ``x`` along the profile otherwise.  With
``u = x + y`` and ``v = y - x`` the metric ``e^omega (-dx^2 + dy^2)``
becomes ``e^omega du dv``, so a profile in ``y`` is sampled along
``u + v`` and a profile in ``x`` along ``u - v``.
"""
import functools
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy import integrate, optimize

from . import _fd
from . import lorentz as lz
from .config import tol
from .errors import DegenerateError, InvariantError, PoleError
from .surface import NullGrid, SurfaceData
from .sym import ImmersionGrid

AXES = ("spacelike_euclidean", "spacelike_timelike", "timelike", "null")
CURVE_KINDS = ("log_spiral", "circle", "log_pseudospiral", "timelike_hyperbola")
# profile variable of each axis type
PROFILE_VAR = {"spacelike_euclidean": "y", "spacelike_timelike": "x", "timelike": "x", "null": "x"}

# null basis L1, L2, L3 with <L1,L2> = 1, <L3,L3> = 1 and all other products 0
NULL_BASIS = np.array([[1.0, 1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, np.sqrt(2.0)]]) / np.sqrt(2.0)


def rk4(rhs, y0, s0, h, n, substeps=1, post=None):
    """Classical RK4 for ``y' = rhs(s, y)``; returns the ``n`` samples s0 + k h.

    ``post`` (optional) is applied to the state after every internal step.
    """
    y = np.array(y0, dtype=float)
    out = np.empty((n,) + y.shape)
    out[0] = y
    k = h / substeps
    s = s0
    for i in range(1, n):
        for _ in range(substeps):
            k1 = rhs(s, y)
            k2 = rhs(s + k / 2, y + k / 2 * k1)
            k3 = rhs(s + k / 2, y + k / 2 * k2)
            k4 = rhs(s + k, y + k * k3)
            y = y + k / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if post is not None:
                y = post(y)
            s = s + k
        s = s0 + i * h
        out[i] = y
    return out


# profile-to-grid bookkeeping ---------------------------------------------

def profile_grid(var, s0, h, n, centre=0.0):
    """Null grid with n x n nodes whose profile coordinate runs over s0 + k h, k < 2n-1.

    The other coordinate is centred at ``centre``.
    """
    du = 2.0 * h
    if var == "y":
        u0 = s0 + centre
        v0 = s0 - centre
    else:
        u0 = s0 + (n - 1) * h + centre - (n - 1) * h
        v0 = centre - (n - 1) * h - (s0 + (n - 1) * h)
    return NullGrid(u0, v0, du, du, n, n)


def profile_index(grid, var):
    """Integer index k of the profile sample at each node, and (s0, h) of that sampling."""
    if not np.isclose(grid.du, grid.dv, rtol=1e-12, atol=0):
        raise InvariantError("profile grids need du == dv")
    i = np.arange(grid.nu)[:, None]
    j = np.arange(grid.nv)[None, :]
    h = grid.du / 2.0
    if var == "y":
        return i + j, (grid.u0 + grid.v0) / 2.0, h
    return i - j + (grid.nv - 1), (grid.u0 - grid.v0) / 2.0 - (grid.nv - 1) * h, h


def other_coordinate(grid, var):
    """The coordinate transverse to the profile: x for y-profiles and y for x-profiles."""
    U, V = grid.mesh()
    return (U - V) / 2.0 if var == "y" else (U + V) / 2.0


def affine_fit(s, phi):
    """Least-squares phi ~ alpha s + beta; returns (alpha, beta, max residual)."""
    s = np.asarray(s, float).ravel()
    phi = np.asarray(phi, float).ravel()
    A = np.stack([s, np.ones_like(s)], axis=1)
    (alpha, beta), *_ = np.linalg.lstsq(A, phi, rcond=None)
    return float(alpha), float(beta), float(np.max(np.abs(A @ [alpha, beta] - phi)))


def _split_from_profile(grid, var, alpha, beta):
    """f(u), g(v) with f + g = alpha s + beta for s = (u+v)/2 or (u-v)/2."""
    f = alpha * grid.u / 2.0 + beta / 2.0
    g = (alpha if var == "y" else -alpha) * grid.v / 2.0 + beta / 2.0
    return f, g


# cylinders ----------------------------------------------------------------

@dataclass(frozen=True)
class CurveSpec:
    """Plane curve with curvature 1/(C1 s + C2) in arclength (or proper time) s."""
    kind: str
    C1: float
    C2: float

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise InvariantError(f"curve kind must be one of {CURVE_KINDS}")
        constant = self.kind in ("circle", "timelike_hyperbola")
        if constant and self.C1 != 0:
            raise InvariantError(f"{self.kind} needs C1 = 0")
        if not constant and self.C1 == 0:
            raise InvariantError(f"{self.kind} needs C1 != 0")

    @property
    def timelike(self):
        return self.kind in ("log_pseudospiral", "timelike_hyperbola")

    def curvature(self, s):
        d = self.C1 * np.asarray(s, float) + self.C2
        if np.any(d == 0) or (np.min(d) < 0 < np.max(d)):
            raise PoleError("curvature law has a pole on the domain", np.argwhere(d == 0))
        if np.any(d < 0):
            raise InvariantError("curvature law must be positive on the domain")
        return 1.0 / d


def plane_curve(spec, s0, h, n, substeps=4):
    """Integrate the Frenet system of ``spec``; returns (point, tangent, normal) samples.

    Euclidean curves use the angle theta' = kappa with tangent (cos, sin);
    timelike curves use the rapidity psi' = kappa with tangent (cosh, sinh).
    The returned normal satisfies point'' = kappa * normal.
    """
    spec.curvature(s0 + h * np.arange(n))
    if spec.timelike:
        trig = lambda t: (np.cosh(t), np.sinh(t))
    else:
        trig = lambda t: (np.cos(t), np.sin(t))

    def rhs(s, y):
        c, sn = trig(y[2])
        return np.array([c, sn, 1.0 / (spec.C1 * s + spec.C2)])

    Y = rk4(rhs, [0.0, 0.0, 0.0], s0, h, n, substeps)
    c, sn = trig(Y[:, 2])
    T = np.stack([c, sn], -1)
    Nrm = np.stack([sn, c], -1) if spec.timelike else np.stack([-sn, c], -1)
    return Y[:, :2], T, Nrm


def thimc_cylinder(spec, grid, substeps=4):
    """Cylinder over the curve of ``spec`` on a null grid with du == dv.

    Euclidean curves: F = (x, a(y)); timelike curves: F = (a(x), y).
    Returns (ImmersionGrid, SurfaceData) with H = kappa/2 and omega = 0.
    """
    var = "x" if spec.timelike else "y"
    k, s0, h = profile_index(grid, var)
    n = grid.nu + grid.nv - 1
    P, T, Nrm = plane_curve(spec, s0, h, n, substeps)
    kappa = spec.curvature(s0 + h * np.arange(n))
    t = other_coordinate(grid, var)
    zeros = np.zeros(grid.shape)
    if var == "y":
        pts = np.stack([t, P[k, 0], P[k, 1]], -1)
        nrm = np.stack([zeros, Nrm[k, 0], Nrm[k, 1]], -1)
        Q = kappa[k] / 4.0
    else:
        pts = np.stack([P[k, 0], P[k, 1], t], -1)
        # F_xx = kappa n with <n, n> = 1; the normal -n gives H = kappa / 2
        nrm = -np.stack([Nrm[k, 0], Nrm[k, 1], zeros], -1)
        Q = -kappa[k] / 4.0
    H = kappa[k] / 2.0
    s_u = grid.u * spec.C1 + spec.C2
    s_v = (grid.v if var == "y" else -grid.v) * spec.C1 + spec.C2
    data = SurfaceData(grid, zeros, Q, Q, H, 0, s_u, s_v,
                       meta={"example": "cylinder", "curve": spec.kind,
                             "C1": spec.C1, "C2": spec.C2})
    imm = ImmersionGrid.from_coords("E31", grid, pts, nrm, {"example": "cylinder", "curve": spec.kind})
    return imm, data


# B-scrolls ------------------------------------------------------------------

NULL_GRAM = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class NullFrame:
    """Samples of a null Frenet curve: position, frame (A, B, C) and kappa, tau."""
    s: np.ndarray
    gamma: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray

    def gram(self):
        L = np.stack([self.A, self.B, self.C], -1)
        return np.einsum("...ia,ij,...jb->...ab", L, lz.METRIC_E31, L)

    def gram_drift(self):
        return float(np.max(np.abs(self.gram() - NULL_GRAM)))


def _gram_correct(L):
    """First-order symmetric correction L -> L (1 - G0^-1 (G - G0) / 2)."""
    G = L.T @ lz.METRIC_E31 @ L
    X = np.eye(3) - 0.5 * np.linalg.solve(NULL_GRAM, G - NULL_GRAM)
    return L @ X


def null_frame(kappa, tau, s0, h, n, substeps=1, gram_correction=True):
    """Integrate dL/ds = L [[0,0,-tau],[0,0,-kappa],[kappa,tau,0]] and gamma' = A.

    Starts from the standard null basis at gamma = 0.  The frame is
    projected back to a null frame after every RK4 step when
    ``gram_correction`` is set.
    """
    def rhs(s, y):
        L = y[:, 1:]
        k, t = kappa(s), tau(s)
        M = np.array([[0.0, 0.0, -t], [0.0, 0.0, -k], [k, t, 0.0]])
        return np.concatenate([L[:, :1], L @ M], axis=1)

    def post(y):
        y = y.copy()
        y[:, 1:] = _gram_correct(y[:, 1:])
        return y

    y0 = np.concatenate([np.zeros((3, 1)), NULL_BASIS.T], axis=1)
    Y = rk4(rhs, y0, s0, h, n, substeps, post if gram_correction else None)
    s = s0 + h * np.arange(n)
    vec = np.vectorize
    return NullFrame(s, Y[:, :, 0], Y[:, :, 1], Y[:, :, 2], Y[:, :, 3],
                     vec(kappa, otypes=[float])(s), vec(tau, otypes=[float])(s))


def b_scroll(kappa, tau, grid, substeps=4, gram_correction=True):
    """B-scroll F = gamma(s) + t B(s) on the null grid (u, v) = (s, v).

    The ruling parameter is t = 1 / (T(s)/2 - v) with T(s) = int_{s0}^s tau^2,
    which makes (u, v) null coordinates with metric 2 t^2 du dv.  Then
    H = tau, Q = kappa + t tau', R = 0 and 1/H = f(u) with g = 0.
    """
    fr = null_frame(kappa, tau, grid.u0, grid.du, grid.nu, substeps, gram_correction)
    if np.any(np.abs(fr.tau) < tol("H_floor")):
        raise DegenerateError("the B-scroll needs tau != 0")
    T = integrate.cumulative_simpson(fr.tau ** 2, dx=grid.du, initial=0.0) \
        if hasattr(integrate, "cumulative_simpson") else \
        integrate.cumulative_trapezoid(fr.tau ** 2, dx=grid.du, initial=0.0)
    D = 0.5 * T[:, None] - grid.v[None, :]
    if np.any(np.abs(D) < 1e-12) or (D.min() < 0 < D.max()):
        raise PoleError("ruling parameter blows up on the grid", np.argwhere(np.abs(D) < 1e-12))
    t = 1.0 / D
    pts = fr.gamma[:, None, :] + t[..., None] * fr.B[:, None, :]
    nrm = fr.C[:, None, :] - (t * fr.tau[:, None])[..., None] * fr.B[:, None, :]
    dtau = np.gradient(fr.tau, grid.du, edge_order=2) if len(fr.tau) < 5 else \
        _fd.derivative(fr.tau, grid.du, axis=0, deriv=1, order=4)
    omega = np.log(2.0 * t ** 2)
    Q = fr.kappa[:, None] + t * dtau[:, None]
    H = np.broadcast_to(fr.tau[:, None], grid.shape)
    meta = {"example": "b_scroll", "gram_drift": fr.gram_drift()}
    data = SurfaceData(grid, omega, Q, np.zeros(grid.shape), H, 0, 1.0 / fr.tau,
                       np.zeros(grid.nv), meta=meta)
    imm = ImmersionGrid.from_coords("E31", grid, pts, nrm, meta)
    return imm, data, fr


# surfaces of revolution ---------------------------------------------------

@dataclass(frozen=True)
class RevolutionProfile:
    """Profile samples at s0 + k h.

    For the three non-null axes ``values`` holds omega, domega, ddomega,
    c, dc, ddc; for the null axis it holds a, da, dda, b, db.
    """
    var: str
    s0: float
    h: float
    values: dict
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = {k: np.asarray(v, float) for k, v in self.values.items()}
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return len(next(iter(self.values.values())))

    @property
    def s(self):
        return self.s0 + self.h * np.arange(self.n)

    def __getitem__(self, key):
        return self.values[key]

    def to_dict(self):
        return {"var": self.var, "s0": self.s0, "h": self.h,
                "values": {k: v.tolist() for k, v in self.values.items()}, "meta": self.meta}


@dataclass(frozen=True)
class RevolutionSpec:
    axis: str
    a: float
    profile: RevolutionProfile

    def __post_init__(self):
        if self.axis not in AXES:
            raise InvariantError(f"axis must be one of {AXES}")
        if self.axis != "null" and self.a == 0:
            raise InvariantError("the rotation speed a must be nonzero")
        if self.profile.var != PROFILE_VAR[self.axis]:
            raise InvariantError(f"axis {self.axis} needs a profile in {PROFILE_VAR[self.axis]}")
        err = constraint_residual(self)
        scale = 1.0 if self.axis == "null" else self.a ** 2
        if err > 1e-8 * scale:
            raise InvariantError(f"profile violates the {self.axis} constraint (residual {err:.2e})")


def constraint_residual(spec):
    """Largest relative violation of the axis constraint on the profile samples."""
    p = spec.profile
    if spec.axis == "null":
        lhs = 2.0 * p["da"] * p["db"] + p["a"] ** 2
        return float(np.max(np.abs(lhs) / np.maximum(1.0, p["a"] ** 2)))
    cp2 = p["dc"] ** 2 * np.exp(-p["omega"])
    w2 = p["domega"] ** 2 / 4.0
    lhs = {"spacelike_euclidean": cp2 + w2, "spacelike_timelike": -cp2 + w2,
           "timelike": cp2 - w2}[spec.axis]
    return float(np.max(np.abs(lhs - spec.a ** 2)))


def closed_form_H(spec):
    """Mean curvature of the example's closed formula on the profile samples."""
    p = spec.profile
    if spec.axis == "null":
        a, da, dda = p["a"], p["da"], p["dda"]
        return (dda * a + da ** 2) / (4.0 * a ** 2 * da)
    dc = p["dc"]
    if np.any(np.abs(dc) < 1e-14):
        raise PoleError("c' vanishes: the mean curvature formula has a pole",
                        np.argwhere(np.abs(dc) < 1e-14))
    w1, w2, a = p["domega"], p["ddomega"], spec.a
    if spec.axis == "timelike":
        return -(2.0 * w2 + w1 ** 2 + 4.0 * a ** 2) / (8.0 * dc)
    return (4.0 * a ** 2 - w1 ** 2 - 2.0 * w2) / (8.0 * dc)


def profile_fundamental_forms(spec):
    """(e^omega, L, N) per profile sample: I = e^omega(-dx^2+dy^2), II = L dx^2 + N dy^2.

    Computed from the immersion without using the constraint.  The normal
    is the one giving the closed-form sign of H (for the timelike axis the
    cross-product normal is reversed).  For the null axis the normal is
    minus the one normalised by a, and the formulas use b' = -a^2/(2a').
    """
    p = spec.profile
    if spec.axis == "null":
        a, da, dda = p["a"], p["da"], p["dda"]
        L = -(a * dda / da - da)
        N = da
        return a ** 2, L, N
    e = np.exp(p["omega"])
    w1, w2, c1, c2, a2 = p["domega"], p["ddomega"], p["dc"], p["ddc"], spec.a ** 2
    mixed = (-c1 * w1 ** 2 / 2.0 - c1 * w2 + c2 * w1) * e / a2
    if spec.axis == "spacelike_euclidean":
        S = np.sqrt((e * w1 ** 2 + 4.0 * c1 ** 2) * e / a2)
        return e, -2.0 * e * c1 / S, mixed / S
    if spec.axis == "spacelike_timelike":
        S2 = (e * w1 ** 2 - 4.0 * c1 ** 2) * e / a2
    else:
        S2 = (4.0 * c1 ** 2 - e * w1 ** 2) * e / a2
    if np.any(S2 <= 0):
        raise DegenerateError("profile gives a degenerate normal")
    S = np.sqrt(S2)
    if spec.axis == "spacelike_timelike":
        return e, mixed / S, -2.0 * e * c1 / S
    return e, -mixed / S, -2.0 * e * c1 / S


def _revolution_points(spec, k, t):
    """Ambient points and unit normals at nodes with profile index k and transverse coordinate t."""
    p, a = spec.profile, spec.a
    if spec.axis == "null":
        A, dA, B, dB = p["a"][k], p["da"][k], p["b"][k], p["db"][k]
        x_coef = np.stack([A, B - t ** 2 * A / 2.0, t * A], -1)
        n_coef = -np.stack([dA, -(dB + t ** 2 * dA / 2.0), t * dA], -1) / A[..., None]
        return x_coef @ NULL_BASIS, n_coef @ NULL_BASIS
    r = np.exp(p["omega"][k] / 2.0)
    c = p["c"][k]
    w1, c1 = p["domega"][k], p["dc"][k]
    if spec.axis == "spacelike_euclidean":
        sh, ch = np.sinh(a * t), np.cosh(a * t)
        pts = np.stack([r * sh, r * ch, c], -1) / a
        # profile tangent and rotation tangent
        Ty = np.stack([w1 / 2 * r * sh, w1 / 2 * r * ch, c1], -1) / a
        Tx = np.stack([r * ch, r * sh, 0 * r], -1)
    elif spec.axis == "spacelike_timelike":
        sh, ch = np.sinh(a * t), np.cosh(a * t)
        pts = np.stack([r * ch, r * sh, c], -1) / a
        Tx = np.stack([w1 / 2 * r * ch, w1 / 2 * r * sh, c1], -1) / a
        Ty = np.stack([r * sh, r * ch, 0 * r], -1)
    else:
        cs, sn = np.cos(a * t), np.sin(a * t)
        pts = np.stack([c, r * cs, r * sn], -1) / a
        Tx = np.stack([c1, w1 / 2 * r * cs, w1 / 2 * r * sn], -1) / a
        Ty = np.stack([0 * r, -r * sn, r * cs], -1)
    n = np.cross(Tx, Ty) @ lz.METRIC_E31
    n = n / np.sqrt(lz.inner(n, n, "E31"))[..., None]
    if spec.axis == "timelike":
        n = -n
    return pts, n


def revolution_surface(spec, grid=None, n=None, centre=0.0):
    """Surface of revolution from ``spec`` on a null grid.

    When no grid is given, an n x n grid covering the whole profile is
    built (n defaults to the largest size the profile allows).  Returns
    (ImmersionGrid, SurfaceData).  The stored H is the one of the
    immersion; ``meta['closed_form_H_error']`` records its distance to the
    example's closed formula.  When 1/H is affine in the profile
    coordinate (up to 1e-6 relative) the data carries the splitting.
    """
    prof = spec.profile
    var = prof.var
    if grid is None:
        n = (prof.n + 1) // 2 if n is None else n
        grid = profile_grid(var, prof.s0, prof.h, n, centre)
    k, s0, h = profile_index(grid, var)
    if not (np.isclose(h, prof.h, rtol=1e-10) and abs(s0 - prof.s0) <= 1e-9 * max(1.0, abs(s0))):
        raise InvariantError("grid does not sample the profile nodes")
    if k.max() >= prof.n:
        raise InvariantError("grid extends beyond the profile")
    e, L, N = profile_fundamental_forms(spec)
    H = (N - L) / (2.0 * e)
    Qp = (L + N) / 4.0
    Hc = closed_form_H(spec)
    pts, nrm = _revolution_points(spec, k, other_coordinate(grid, var))
    used = np.unique(k)
    meta = {"example": "revolution", "axis": spec.axis, "a": spec.a,
            "constraint_residual": constraint_residual(spec),
            "closed_form_H_error": float(np.max(np.abs(H[used] - Hc[used]))),
            **prof.meta}
    f = g = None
    if np.all(np.abs(H[used]) > tol("H_floor")):
        alpha, beta, res = affine_fit(prof.s[used], 1.0 / H[used])
        meta["inverse_H_affine"] = {"slope": alpha, "intercept": beta, "residual": res}
        if res <= 1e-6 * max(1.0, float(np.max(np.abs(1.0 / H[used])))):
            f, g = _split_from_profile(grid, var, alpha, beta)
            # exact affine splitting: use the fit itself as H
            H_nodes = 1.0 / (f[:, None] + g[None, :])
            if np.max(np.abs(H_nodes - H[k])) > 1e-5 * max(1.0, float(np.max(np.abs(H)))):
                f = g = None
    data = SurfaceData(grid, np.log(e)[k], Qp[k], Qp[k], H[k], 0, f, g, meta=meta)
    if f is not None:
        data = SurfaceData(grid, np.log(e)[k], Qp[k], Qp[k], 1.0 / (f[:, None] + g[None, :]),
                           0, f, g, meta=meta)
    imm = ImmersionGrid.from_coords("E31", grid, pts, nrm, dict(meta))
    return imm, data


def profile_from_functions(var, s0, h, n, omega, c):
    """Profile from sympy expressions omega(s), c(s) in the symbol ``s``."""
    s = sp.Symbol("s")
    exprs = [omega, sp.diff(omega, s), sp.diff(omega, s, 2), c, sp.diff(c, s), sp.diff(c, s, 2)]
    fn = sp.lambdify(s, exprs, "numpy")
    grid = s0 + h * np.arange(n)
    vals = [np.broadcast_to(np.asarray(v, float), grid.shape).copy() for v in fn(grid)]
    names = ("omega", "domega", "ddomega", "c", "dc", "ddc")
    return RevolutionProfile(var, s0, h, dict(zip(names, vals)),
                             {"omega": str(omega), "c": str(c)})


# Painleve-III type profiles --------------------------------------------

PAINLEVE_KINDS = ("trig", "hyp", "cosh")


@functools.lru_cache(maxsize=None)
def _painleve_system(kind, branch):
    """Lambdified (phi'', omega, omega', omega'', c, c', c'') in (s, phi, phi')."""
    s, p, p1 = sp.symbols("s p p1")
    if kind == "trig":
        ode = 2 * sp.sin(2 * p) - (p1 + 2 * sp.sin(p)) / s
        ew = s ** 2 / 4 * (p1 + 2 * sp.sin(p)) ** 2
        c = -s ** 2 / 4 * (p1 ** 2 - 4 * sp.sin(p) ** 2)
    elif kind == "hyp":
        sign = {"minus": -1, "plus": 1}[branch]
        ode = 2 * sp.sinh(2 * p) - (p1 + sign * 2 * sp.sinh(p)) / s
        ew = s ** 2 / 4 * (p1 + sign * 2 * sp.sinh(p)) ** 2
        c = s ** 2 / 4 * (p1 ** 2 - 4 * sp.sinh(p) ** 2)
    else:
        sign = {"uncorrected": 1, "consistent": -1}[branch]
        ode = 2 * sp.sinh(2 * p) + sign * (p1 + 2 * sp.cosh(p)) / s
        ew = s ** 2 / 4 * (p1 + 2 * sp.cosh(p)) ** 2
        c = s ** 2 / 4 * (p1 ** 2 - 4 * sp.cosh(p) ** 2)

    def D(e):
        return sp.diff(e, s) + sp.diff(e, p) * p1 + sp.diff(e, p1) * ode

    w = sp.log(ew)
    w1 = D(w)
    c1 = D(c)
    exprs = [ode, w, w1, D(w1), c, c1, D(c1)]
    return sp.lambdify((s, p, p1), exprs, "numpy")


PAINLEVE_AXIS = {"trig": "spacelike_euclidean", "hyp": "spacelike_timelike", "cosh": "timelike"}
DEFAULT_BRANCH = {"trig": None, "hyp": "minus", "cosh": "uncorrected"}


@dataclass(frozen=True)
class PainleveProfile:
    kind: str
    branch: str
    s: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    profile: RevolutionProfile
    ode_residual: float
    anomalous: bool

    @property
    def spec(self):
        return RevolutionSpec(PAINLEVE_AXIS[self.kind], 2.0, self.profile)


def painleve_residual(kind, branch, s, phi, h, order=4):
    """Residual phi'' - rhs(s, phi, phi') with phi', phi'' from finite differences."""
    fn = _painleve_system(kind, branch)
    d1 = _fd.derivative(phi, h, axis=0, deriv=1, order=order)
    d2 = _fd.derivative(phi, h, axis=0, deriv=2, order=order)
    rhs = np.broadcast_to(np.asarray(fn(s, phi, d1)[0], float), s.shape)
    r = d2 - rhs
    return r[order:-order] if len(r) > 2 * order else r


def solve_painleve_profile(kind, phi0=0.5, dphi0=0.0, domain=(1.0, 1.5), n=129,
                           branch=None, substeps=4):
    """Integrate the profile equation of ``kind`` on ``domain`` with RK4.

    The solution is sampled at 2n-1 points, enough for an n x n null grid.
    ``branch`` selects the sign variant: ``minus``/``plus`` for ``hyp`` and
    ``uncorrected``/``consistent`` for ``cosh``.  The ODE residual is evaluated
    with 4th-order differences on the RK4 substep grid, which is
    ``substeps`` times finer than the sampling.
    """
    if kind not in PAINLEVE_KINDS:
        raise InvariantError(f"kind must be one of {PAINLEVE_KINDS}")
    branch = DEFAULT_BRANCH[kind] if branch is None else branch
    s0, s1 = map(float, domain)
    if s0 <= 0 < s1 or s0 * s1 <= 0:
        raise InvariantError("domain must not contain 0")
    fn = _painleve_system(kind, branch)
    m = 2 * n - 1
    h = (s1 - s0) / (m - 1)
    rhs = lambda s, y: np.array([y[1], fn(s, y[0], y[1])[0]])
    # the lambdified system also evaluates log e^omega; a vanishing e^omega
    # shows up as non-finite values and is reported below
    with np.errstate(divide="ignore", invalid="ignore"):
        fine = rk4(rhs, [phi0, dphi0], s0, h / substeps, (m - 1) * substeps + 1)
        sf = s0 + h / substeps * np.arange(len(fine))
        resid = float(np.max(np.abs(painleve_residual(kind, branch, sf, fine[:, 0], h / substeps))))
        Y = fine[::substeps]
        s = s0 + h * np.arange(m)
        _, w, w1, w2, c, c1, c2 = (np.broadcast_to(np.asarray(v, float), s.shape)
                                   for v in fn(s, Y[:, 0], Y[:, 1]))
    if not np.all(np.isfinite(w)):
        bad = np.argwhere(~np.isfinite(w)).ravel()
        raise DegenerateError(f"e^omega vanishes on the profile at {len(bad)} samples")
    ew = np.exp(w)
    if np.min(ew) < 1e-12:
        raise DegenerateError("e^omega vanishes on the profile")
    anomalous = kind == "cosh" and branch == "uncorrected"
    prof = RevolutionProfile(PROFILE_VAR[PAINLEVE_AXIS[kind]], s0, h,
                             {"omega": w, "domega": w1, "ddomega": w2, "c": c, "dc": c1, "ddc": c2},
                             {"painleve": kind, "branch": branch, "anomalous": anomalous})
    return PainleveProfile(kind, branch, s, Y[:, 0], Y[:, 1], prof, resid, anomalous)


# null axis ------------------------------------------------------------------

@dataclass(frozen=True)
class NullAxisProfile:
    x: np.ndarray
    a: np.ndarray
    da: np.ndarray
    dda: np.ndarray
    b: np.ndarray
    a_quadrature: np.ndarray
    discrepancy: float
    c1: float
    variant: str
    profile: RevolutionProfile

    @property
    def spec(self):
        return RevolutionSpec("null", 1.0, self.profile)


def null_axis_first_integral(x, a, c1):
    """a' from x a a' = (2a^3 + 3a^2 + c1)/6."""
    return (2.0 * a ** 3 + 3.0 * a ** 2 + c1) / (6.0 * x * a)


def null_axis_residual(x, a, da, dda):
    """Residual of x (a'' a + a'^2) - a^2 a'."""
    return x * (dda * a + da ** 2) - a ** 2 * da


def null_axis_quadrature(x, x0, a0, c1):
    """Invert 12 int_{a0}^{a} t/(2t^3+3t^2+c1) dt = 2 log|x/x0| for sorted x.

    Each sample continues from the previous one: the increment of the
    integral is computed by adaptive quadrature and matched to the
    increment of 2 log|x| by Brent's method on a bracket that never
    crosses a root of the denominator or a = 0.
    """
    integrand = lambda t: 12.0 * t / (2.0 * t ** 3 + 3.0 * t ** 2 + c1)
    roots = np.roots([2.0, 3.0, 0.0, c1])
    walls = np.concatenate([roots[np.abs(roots.imag) < 1e-12].real, [0.0]])
    lo = max([w for w in walls if w < a0], default=-np.inf)
    hi = min([w for w in walls if w > a0], default=np.inf)
    out = np.empty(len(x))
    a_prev, t_prev = float(a0), 2.0 * np.log(abs(x[0] / x0))
    if t_prev != 0.0:
        raise InvariantError("quadrature samples must start at x0")
    out[0] = a0
    for i in range(1, len(x)):
        target = 2.0 * np.log(abs(x[i] / x0)) - t_prev
        F = lambda a: integrate.quad(integrand, a_prev, a, epsabs=1e-14, epsrel=1e-13)[0] - target
        d = np.sign(target) * np.sign(integrand(a_prev))
        wall = hi if d > 0 else lo
        step = 1e-3 * max(1.0, abs(a_prev))
        left = a_prev
        for _ in range(200):
            right = left + d * step
            if np.isfinite(wall) and (right - wall) * d >= 0:
                right = 0.5 * (left + wall)
                if abs(right - wall) < 1e-13:
                    raise PoleError("quadrature reaches a root of 2a^3+3a^2+c1 or a = 0", [i])
            if F(right) * F(a_prev) <= 0:
                break
            left = right
            step *= 2.0
        else:
            raise PoleError("quadrature inversion did not bracket the solution", [i])
        a_new = optimize.brentq(F, min(left, right), max(left, right), xtol=1e-15, rtol=1e-15)
        out[i] = a_new
        a_prev, t_prev = a_new, t_prev + target
    return out


def solve_null_axis(c1, a0, domain=(1.0, 1.5), n=129, x0=None, substeps=4, variant="uncorrected"):
    """Profile a(x), b(x) of a revolution surface with null axis.

    ``variant="uncorrected"`` integrates x (a'' a + a'^2) = a^2 a' with a'(x0)
    from the first integral x a a' = (2a^3+3a^2+c1)/6 and cross-checks it
    against the quadrature relation inverted by root finding; the constant
    c2 of that relation is fixed by a(x0) = a0.  ``variant="consistent"``
    integrates 2 x a'' = a a', for which the mean curvature of the
    immersion itself is 1/(4x); a'(x0) = a0 there.  b follows from
    2 a' b' = -a^2 with b(x0) = 0.
    """
    s0, s1 = map(float, domain)
    if s0 * s1 <= 0:
        raise InvariantError("domain must not contain 0")
    x0 = s0 if x0 is None else float(x0)
    m = 2 * n - 1
    h = (s1 - s0) / (m - 1)
    if variant == "uncorrected":
        if abs(2 * a0 ** 3 + 3 * a0 ** 2 + c1) < 1e-14:
            raise PoleError("2a^3+3a^2+c1 vanishes at the initial value", [0])
        da0 = null_axis_first_integral(x0, a0, c1)
        acc = lambda x, a, da: (a ** 2 * da / x - da ** 2) / a
    elif variant == "consistent":
        da0 = a0
        acc = lambda x, a, da: a * da / (2.0 * x)
    else:
        raise InvariantError("variant must be 'uncorrected' or 'consistent'")

    def rhs(x, y):
        a, da, _ = y
        if da == 0 or a == 0:
            raise DegenerateError("a or a' vanishes along the null-axis profile")
        return np.array([da, acc(x, a, da), -a ** 2 / (2.0 * da)])

    Y = rk4(rhs, [a0, da0, 0.0], x0, h, m, substeps)
    x = x0 + h * np.arange(m)
    a, da, b = Y[:, 0], Y[:, 1], Y[:, 2]
    dda = acc(x, a, da)
    db = -a ** 2 / (2.0 * da)
    if variant == "uncorrected":
        aq = null_axis_quadrature(x, x0, a0, c1)
        disc = float(np.max(np.abs(aq - a)))
    else:
        aq = np.full_like(a, np.nan)
        disc = float("nan")
    prof = RevolutionProfile("x", x0, h, {"a": a, "da": da, "dda": dda, "b": b, "db": db},
                             {"null_axis": variant, "c1": c1})
    return NullAxisProfile(x, a, da, dda, b, aq, disc, c1, variant, prof)


def cmc_data(k, grid):
    """Exact constant mean curvature data (omega, Q, R, H) = (0, k/2, k/2, k) with f = g = 1/(2k)."""
    if k == 0:
        raise DegenerateError("constant mean curvature must be nonzero")
    f = np.full(grid.nu, 0.5 / k)
    g = np.full(grid.nv, 0.5 / k)
    return SurfaceData(grid, np.zeros(grid.shape), k / 2.0, k / 2.0, float(k), 0, f, g,
                       meta={"example": "cmc", "k": k})
