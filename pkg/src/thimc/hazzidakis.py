"""Normal form q(t) of (eps, theta)-isothermic THIMC surfaces.

The generalised Hazzidakis equation

    (q''/q')' - q' = S(t) (2 - (q^2 - theta^2)/q'),    -eps q' > 0,

is integrated as the explicit third-order system

    q''' = q''^2/q' + q'^2 + S(t) (2 q' - (q^2 - theta^2)).

S(t) is 1/sin^2(2t), 1/sinh^2(2t) or 1/t^2 for families A, B, C,
optionally multiplied by ``s_scale`` and ``coefficient_sign``.  Surface data
are rebuilt from q through a coordinate realisation (xi, eta, rho, sigma)
with t = eps u + v.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import _fd
from .config import tol
from .errors import DegenerateError, InvariantError, PoleError, SignConditionError
from .surface import SurfaceData, gauss_codazzi_gate

S_BASE = {
    "A": lambda t: 1.0 / np.sin(2.0 * t) ** 2,
    "B": lambda t: 1.0 / np.sinh(2.0 * t) ** 2,
    "C": lambda t: 1.0 / np.asarray(t, dtype=float) ** 2,
}
S_POLE_LIMIT = 1e8


@dataclass(frozen=True)
class HazzidakisParams:
    family: str
    eps: int
    theta: float
    t0: float
    q0: float
    q1: float
    q2: float
    t_end: float
    h: float = 2.5e-3
    s_scale: float = 1.0
    coefficient_sign: int = 1

    def __post_init__(self):
        if self.family not in S_BASE:
            raise InvariantError(f"family must be one of {sorted(S_BASE)}")
        if self.eps not in (1, -1):
            raise InvariantError("eps must be +1 or -1")
        if self.q1 == 0:
            raise InvariantError("q'(t0) must be nonzero")
        if not -self.eps * self.q1 > 0:
            raise SignConditionError(f"sign condition -eps q' > 0 fails at t0 = {self.t0}",
                                     t_star=self.t0)
        if self.h <= 0 or self.t_end == self.t0:
            raise InvariantError("need h > 0 and t_end != t0")
        if abs(self.S(self.t0)) > S_POLE_LIMIT:
            raise PoleError(f"S(t0) is at a pole for family {self.family}", [])

    def S(self, t):
        return self.coefficient_sign * self.s_scale * S_BASE[self.family](t)


@dataclass
class HazzidakisSolution:
    t: np.ndarray
    q: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    params: object
    residual: float = float("nan")
    kind: str = "numeric"          # "numeric" or "case1"
    exact: object = field(default=None, repr=False)
    theta: float = None
    eps: int = None

    def __post_init__(self):
        if self.params is not None:
            self.theta = self.params.theta if self.theta is None else self.theta
            self.eps = self.params.eps if self.eps is None else self.eps

    def sample(self, t):
        """(q, q', q'') at arbitrary t inside the sampled range."""
        t = np.asarray(t, dtype=float)
        if self.exact is not None:
            return self.exact(t)
        lo, hi = min(self.t[0], self.t[-1]), max(self.t[0], self.t[-1])
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise InvariantError("requested t outside the solution range")
        order = np.argsort(self.t)
        ts = self.t[order]
        q = CubicHermiteSpline(ts, self.q[order], self.q1[order])(t)
        q1 = CubicHermiteSpline(ts, self.q1[order], self.q2[order])(t)
        q3 = np.array([_q3(tt, qq, a, b, self.params) for tt, qq, a, b in
                       zip(ts, self.q[order], self.q1[order], self.q2[order])])
        q2 = CubicHermiteSpline(ts, self.q2[order], q3)(t)
        return q, q1, q2

    def to_csv_rows(self):
        return [(repr(float(a)), repr(float(b)), repr(float(c)), repr(float(d)))
                for a, b, c, d in zip(self.t, self.q, self.q1, self.q2)]


def _q3(t, q, q1, q2, p):
    S = p.S(t)
    return q2 ** 2 / q1 + q1 ** 2 + S * (2.0 * q1 - (q ** 2 - p.theta ** 2))


def _rhs(t, y, p):
    q, q1, q2 = y
    S = p.S(t)
    return np.array([q1, q2, q2 ** 2 / q1 + q1 ** 2 + S * (2.0 * q1 - (q ** 2 - p.theta ** 2))])


def star_residual(t, q, q1, q2, theta, S, order=4):
    """(q''/q')' - q' - S (2 - (q^2 - theta^2)/q') with a finite-difference derivative
    of the stored ratio q''/q'."""
    t = np.asarray(t, dtype=float)
    h = t[1] - t[0]
    ratio = q2 / q1
    d_ratio = _fd.derivative(ratio, h, order=order)
    return d_ratio - q1 - S(t) * (2.0 - (q ** 2 - theta ** 2) / q1)


def solve_hazzidakis(p, refine=2):
    """RK4-integrate the explicit system from t0 to t_end.

    The internal step is ``h / refine``; samples are returned every ``h``.
    The residual certificate evaluates the original equation on the refined
    internal samples with fourth-order differences.  A breach of -eps q' > 0 raises
    SignConditionError carrying ``t_star`` and the partial solution; an
    approach to a pole of S raises PoleError.
    """
    n = int(round(abs(p.t_end - p.t0) / p.h))
    if n < 6:
        raise InvariantError("need at least 6 steps for the residual certificate")
    direction = np.sign(p.t_end - p.t0)
    hs = direction * p.h / refine
    y = np.array([p.q0, p.q1, p.q2], dtype=float)
    t = p.t0
    ts, ys = [t], [y.copy()]
    fine_t, fine_y = [t], [y.copy()]

    def partial():
        arr = np.array(ys)
        return HazzidakisSolution(np.array(ts), arr[:, 0], arr[:, 1], arr[:, 2], p)

    for k in range(n):
        for _ in range(refine):
            k1 = _rhs(t, y, p)
            k2 = _rhs(t + hs / 2, y + hs / 2 * k1, p)
            k3 = _rhs(t + hs / 2, y + hs / 2 * k2, p)
            k4 = _rhs(t + hs, y + hs * k3, p)
            y = y + hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t + hs
            fine_t.append(t)
            fine_y.append(y.copy())
            if abs(p.S(t)) > S_POLE_LIMIT:
                raise PoleError(f"S(t) exceeds {S_POLE_LIMIT:g} near t = {t}", [])
            if not (-p.eps * y[1] > 0) or not np.all(np.isfinite(y)):
                raise SignConditionError(f"sign condition -eps q' > 0 breached at t = {t}",
                                         t_star=t, partial=partial())
        t = p.t0 + direction * p.h * (k + 1)
        ts.append(t)
        ys.append(y.copy())
    sol = partial()
    fy = np.array(fine_y)
    tf = p.t0 + hs * np.arange(len(fine_t))
    res = star_residual(tf, fy[:, 0], fy[:, 1], fy[:, 2], p.theta, p.S)
    sol.residual = float(np.max(np.abs(res)))
    return sol


# case 1 closed forms -------------------------------------------------------

def case1_exact(theta):
    """Callable t -> (q, q', q'', q''') for the case-1 closed form."""
    if theta != 0:
        def fn(t):
            x = theta * np.asarray(t, dtype=float) / 2
            th, sech2 = np.tanh(x), 1.0 / np.cosh(x) ** 2
            return (-theta * th, -0.5 * theta ** 2 * sech2, 0.5 * theta ** 3 * sech2 * th,
                    0.25 * theta ** 4 * (sech2 ** 2 - 2 * sech2 * th ** 2))
    else:
        def fn(t):
            t = np.asarray(t, dtype=float)
            return -2.0 / t, 2.0 / t ** 2, -4.0 / t ** 3, 12.0 / t ** 4
    return fn


def case1_closed_form(theta, eps, t_range, n=201, family="C"):
    """Sampled q = -theta tanh(theta t / 2) (theta != 0) or q = -2/t (theta = 0).

    theta != 0 requires eps = +1 and theta = 0 requires eps = -1.  The
    residual certificate uses exact derivatives, so it only sees roundoff.
    """
    if theta != 0 and eps != 1:
        raise InvariantError("theta != 0 requires eps = +1")
    if theta == 0 and eps != -1:
        raise InvariantError("theta = 0 requires eps = -1")
    t = np.linspace(t_range[0], t_range[1], n)
    if theta == 0 and np.any(np.abs(t) < 1e-12):
        raise PoleError("q = -2/t has a pole at t = 0", [])
    fn = case1_exact(theta)
    q, q1, q2, q3 = fn(t)
    p = HazzidakisParams(family, eps, theta, t[0], q[0], q1[0], q2[0], t[-1],
                         (t[-1] - t[0]) / (n - 1)) if abs(S_BASE[family](t[0])) < S_POLE_LIMIT else None
    S = S_BASE[family]
    res = q3 / q1 - (q2 / q1) ** 2 - q1 - S(t) * (2.0 - (q ** 2 - theta ** 2) / q1)
    return HazzidakisSolution(t, q, q1, q2, p, float(np.max(np.abs(res))), "case1",
                              exact=lambda tt: fn(tt)[:3], theta=theta, eps=eps)


def case1_rhs_factor(sol, theta):
    """2 - (q^2 - theta^2)/q', which vanishes identically on case-1 solutions."""
    return 2.0 - (sol.q ** 2 - theta ** 2) / sol.q1


# coordinate realisations ----------------------------------------------------

@dataclass(frozen=True)
class CoordinateRealization:
    """Samples of xi(u), eta(v) and rho = du/dxi, sigma = dv/deta on a grid."""
    xi: np.ndarray
    eta: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray
    eps: int

    def __post_init__(self):
        if np.any(np.asarray(self.rho) <= 0) or np.any(np.asarray(self.sigma) <= 0):
            raise InvariantError("rho and sigma must be positive")

    def coefficient(self):
        """eps / (rho sigma (xi + eta)^2), the coefficient the Gauss equation requires."""
        s = self.xi[:, None] + self.eta[None, :]
        if np.any(np.abs(s) < 1e-14):
            raise PoleError("xi + eta vanishes", np.argwhere(np.abs(s) < 1e-14))
        return self.eps / (self.rho[:, None] * self.sigma[None, :] * s ** 2)


def realization(kind, grid, eps=1, scale=2.0):
    """Ready-made realisations: ``identity`` (xi=u, eta=v), ``tan`` and ``tanh``.

    ``tan``/``tanh`` use xi = tan(scale u) / tanh(scale u); they match families
    A/B with ``s_scale = scale**2`` and the identity matches family C.
    """
    u, v = grid.u, grid.v
    if kind == "identity":
        return CoordinateRealization(u.copy(), v.copy(), np.ones_like(u), np.ones_like(v), eps)
    if kind == "tan":
        return CoordinateRealization(np.tan(scale * u), np.tan(scale * v),
                                     np.cos(scale * u) ** 2 / scale, np.cos(scale * v) ** 2 / scale, eps)
    if kind == "tanh":
        return CoordinateRealization(np.tanh(scale * u), np.tanh(scale * v),
                                     np.cosh(scale * u) ** 2 / scale, np.cosh(scale * v) ** 2 / scale, eps)
    raise ValueError(f"unknown realisation {kind!r}")


def t_field(grid, eps):
    U, V = grid.mesh()
    return eps * U + V


def realization_defect(params, real, grid):
    """max |S(eps u + v) - eps / (rho sigma (xi + eta)^2)| over the grid."""
    t = t_field(grid, real.eps)
    return float(np.max(np.abs(params.S(t) - real.coefficient())))


def reconstruct_surface(sol, real, grid, check=True):
    """Minkowski surface data from q(t):

    e^omega = -2 eps q' (xi+eta)^2, Q = (eps q + theta)/rho,
    R = (q - eps theta)/sigma, H = 1/(xi + eta), splitting f = xi, g = eta.
    """
    p = sol.params
    eps, theta = real.eps, sol.theta
    if sol.eps != eps:
        raise InvariantError("realisation and solution use different eps")
    if sol.kind != "case1":
        defect = realization_defect(p, real, grid)
        scale = float(np.max(np.abs(real.coefficient())))
        if defect > tol("realization") * max(1.0, scale):
            raise InvariantError(f"realisation does not reproduce S(t): defect {defect:.3e}")
    s = real.xi[:, None] + real.eta[None, :]
    if np.any(np.abs(s) < 1e-14):
        raise PoleError("xi + eta vanishes", np.argwhere(np.abs(s) < 1e-14))
    t = t_field(grid, eps)
    q, q1, _ = sol.sample(t)
    e = -2.0 * eps * q1 * s ** 2
    if np.any(e <= 0):
        raise DegenerateError("e^omega <= 0 on the grid")
    data = SurfaceData(grid, np.log(e), (eps * q + theta) / real.rho[:, None],
                       (q - eps * theta) / real.sigma[None, :], 1.0 / s, 0,
                       real.xi, real.eta, meta={"theta": theta, "eps": eps})
    if check:
        _gate_residuals(data)
    return data


def _gate_residuals(data):
    gate = gauss_codazzi_gate(data)
    if not gate["pass"]:
        raise InvariantError(f"reconstructed data fail Gauss-Codazzi (residual {gate['worst']:.3e}, "
                             f"orders {gate['orders']})")
    return gate


def dual_case1(sol, real, grid, convention="consistent"):
    """Dual Bonnet data of a case-1 surface.

    theta != 0: e^{omega*} = cosh^2(theta t/2) / (theta^2 (xi+eta)^2),
    Q* = R* = 1/(2(xi+eta)), H* = -2 theta tanh(theta t/2), curvature -4 theta^2.
    The result is rescaled to curvature -1 with factor k = 2|theta| (recorded
    in ``meta``).

    theta = 0: e^{omega*} = t^2/(4(xi+eta)^2), Q* = -R* = 1/(2(xi+eta)) in
    anti isothermal coordinates, H* = 4/t.  ``convention="uncorrected"`` returns
    H* = -4/t instead, which violates the Codazzi equations.
    """
    if sol.kind != "case1":
        raise InvariantError("dual_case1 needs a case-1 solution")
    theta, eps = sol.theta, sol.eps
    s = real.xi[:, None] + real.eta[None, :]
    t = t_field(grid, eps)
    if theta != 0:
        k = 2.0 * abs(theta)
        omega = np.log(np.cosh(theta * t / 2) ** 2 / (theta ** 2 * s ** 2))
        Q = R = 1.0 / (2.0 * s)
        H = -2.0 * theta * np.tanh(theta * t / 2)
        meta = {"ambient": "H31", "radius": 1.0 / k, "scale": k, "theta": theta}
        # H / k = -tanh(|theta| (u + v) / 2) = (f + g) / (1 + f g)
        a = abs(theta) / 2
        return SurfaceData(grid, omega + 2 * np.log(k), k * Q, k * R, H / k, -1,
                           -np.tanh(a * grid.u), -np.tanh(a * grid.v), split_form="ratio",
                           meta=meta), "H31"
    omega = np.log(t ** 2 / (4.0 * s ** 2))
    Q = 1.0 / (2.0 * s)
    H = (4.0 if convention == "consistent" else -4.0) / t
    meta = {"ambient": "E31", "convention": convention, "theta": 0.0}
    return SurfaceData(grid, omega, Q, -Q, H, 0, isothermal="anti", meta=meta), "E31"
