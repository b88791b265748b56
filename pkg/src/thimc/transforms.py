"""Transformations between THIMC data sets.

* harmonic maps into the model spaces and the d'Alembert type solution
  formulas for them;
* the Lawson map between solutions of the structure equations for
  ambient curvatures c = +-1 and c = 0 sharing a splitting of 1/H;
* the Christoffel dual of a (+-)isothermic surface in Minkowski space,
  integrated along the grid with a path-independence certificate;
* the data-level dual of (eps, theta)-isothermic surfaces;
* the one-parameter deformations of a splitting (f, g).
"""
import numpy as np

from . import _fd
from . import lorentz as lz
from ._march import march_certified
from .config import tol
from .errors import DegenerateError, InvariantError, PoleError
from .surface import IsothermicStructure, SurfaceData
from .sym import ImmersionGrid
from .verify import harmonic_residual_field

BRANCHES = ("sum", "ratio", "inverse_ratio")


class PositivityError(DegenerateError):
    """The Lawson factor (1 + c f^2)(1 + c g^2) is not positive; ``nodes`` lists where."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = [tuple(int(k) for k in np.atleast_1d(n)) for n in nodes]


# harmonic maps -------------------------------------------------------------

def harmonic_residual(phi, grid, c, order=2):
    """phi_uv - 2 c phi / (1 + c phi^2) phi_u phi_v with central differences."""
    return harmonic_residual_field(phi, grid, c, order)


def dalembert_build(f, g, c, branch="ratio"):
    """Harmonic map from one-variable data: f+g (c=0), (f+g)/(1-cfg) or (1-cfg)/(f+g)."""
    if branch not in BRANCHES:
        raise InvariantError(f"branch must be one of {BRANCHES}")
    F, G = np.meshgrid(np.atleast_1d(np.asarray(f, float)), np.atleast_1d(np.asarray(g, float)),
                       indexing="ij")
    if c == 0 or branch == "sum":
        if c != 0:
            raise InvariantError("the sum branch needs c = 0")
        return F + G
    num, den = F + G, 1.0 - c * F * G
    if branch == "inverse_ratio":
        num, den = den, num
    bad = np.argwhere(np.abs(den) < 1e-14)
    if len(bad) or (np.min(den) < 0 < np.max(den)):
        raise PoleError("denominator vanishes on the grid", bad)
    return num / den


def phi_deformation(f, g, c, tau, variant="scaled"):
    """Deformed splitting and the harmonic map it produces.

    ``scaled``: (2 tau f, 2 tau g), phi = 2 tau (f+g) / (1 - 4 c tau^2 f g).
    ``weighted``: (tau f, g / tau), phi = (tau f + g / tau) / (1 - c f g).
    Both return (f_hat, g_hat, phi) with phi in the ratio form.
    """
    f = np.asarray(f, float)
    g = np.asarray(g, float)
    if variant == "scaled":
        fh, gh = 2.0 * tau * f, 2.0 * tau * g
    elif variant == "weighted":
        if tau == 0:
            raise InvariantError("the weighted deformation needs tau != 0")
        fh, gh = tau * f, g / tau
    else:
        raise InvariantError("variant must be 'scaled' or 'weighted'")
    return fh, gh, dalembert_build(fh, gh, c, "sum" if c == 0 else "ratio")


# Lawson map ----------------------------------------------------------------

def _lawson_factors(f, g, c):
    a = 1.0 + c * np.asarray(f, float) ** 2
    b = 1.0 + c * np.asarray(g, float) ** 2
    prod = a[:, None] * b[None, :]
    bad = np.argwhere(prod <= 0)
    if len(bad):
        raise PositivityError(f"(1 + c f^2)(1 + c g^2) <= 0 at {len(bad)} nodes "
                              "(equivalently H^2 + c <= 0)", bad)
    return a, b


def lawson_transform(s):
    """Map c = +-1 data with H = (1 - c f g)/(f + g) to c = 0 data with H = 1/(f + g).

    e^omega -> (1 + c f^2)(1 + c g^2) e^omega, Q -> (1 + c f^2) Q,
    R -> (1 + c g^2) R; the splitting is kept.
    """
    if s.c not in (1, -1):
        raise InvariantError("the Lawson map starts from c = +1 or -1")
    if s.f is None or s.split_form != "inverse_ratio":
        raise InvariantError("the Lawson map needs a splitting with H = (1 - c f g)/(f + g)")
    a, b = _lawson_factors(s.f, s.g, s.c)
    H0 = 1.0 / (s.f[:, None] + s.g[None, :])
    meta = dict(s.meta, lawson_from=s.c)
    return SurfaceData(s.grid, s.omega + np.log(a[:, None] * b[None, :]), a[:, None] * s.Q,
                       b[None, :] * s.R, H0, 0, s.f, s.g, s.isothermal, "inverse_ratio", meta)


def inverse_lawson(s, c):
    """Inverse of ``lawson_transform``: c = 0 data with a splitting to c = +-1 data."""
    if s.c != 0 or s.f is None:
        raise InvariantError("inverse Lawson map starts from c = 0 data with a splitting")
    if c not in (1, -1):
        raise InvariantError("target curvature must be +1 or -1")
    a, b = _lawson_factors(s.f, s.g, c)
    F, G = np.meshgrid(s.f, s.g, indexing="ij")
    meta = {k: v for k, v in s.meta.items() if k != "lawson_from"}
    return SurfaceData(s.grid, s.omega - np.log(a[:, None] * b[None, :]), s.Q / a[:, None],
                       s.R / b[None, :], (1.0 - c * F * G) / (F + G), c, s.f, s.g,
                       s.isothermal, "inverse_ratio", meta)


def to_inverse_ratio(s):
    """Rewrite a ratio splitting H = (f+g)/(1-cfg) as H = (1-cf'g')/(f'+g').

    Uses f' = 1 / f, g' = -c g, which needs f != 0 on the grid.
    """
    if s.split_form == "inverse_ratio" or s.c == 0:
        return s
    if np.any(np.abs(s.f) < 1e-14):
        raise PoleError("f vanishes: no inverse-ratio splitting", np.argwhere(np.abs(s.f) < 1e-14))
    return s.with_fields(f=1.0 / s.f, g=-s.c * s.g, split_form="inverse_ratio")


# Christoffel dual ------------------------------------------------------------

def _vector_rhs(state, coef):
    return [coef[0]]


def christoffel_dual(s, imm, structure, order=4, strict=True, rho=None, sigma=None):
    """Christoffel transform of a (+-)isothermic immersion in Minkowski space.

    Integrates F*_u = e^-omega rho F_v, F*_v = eps e^-omega sigma F_u from
    F*(0, 0) = 0 along both march orders; the normal is copied.  Returns
    (ImmersionGrid, SurfaceData, certificate).  The data are
    e^omega* = e^-omega rho sigma (anti isothermal when eps = -1),
    H* = q, Q* = rho H / 2, R* = eps sigma H / 2.  With ``strict`` an
    InvariantError is raised when the march orders disagree by more than
    ``path_h2 * h^2`` relative to the size of F*.  ``rho``/``sigma`` override
    the structure's factors in the march only (they may be per-node fields);
    this probes the certificate with coefficients that are not isothermic.
    """
    if imm.ambient != "E31":
        raise InvariantError("the Christoffel transform is defined for Minkowski immersions")
    if structure.theta != 0:
        raise InvariantError("the Christoffel transform needs theta = 0")
    if s.isothermal != "standard":
        raise InvariantError("input must use isothermal (not anti isothermal) null coordinates")
    eps = structure.eps
    structure.check(s)
    grid = s.grid
    P = imm.points
    Pu = _fd.d_u(P, grid.du, order)
    Pv = _fd.d_v(P, grid.dv, order)
    rho_s = np.asarray(structure.rho, float)[:, None]
    sigma_s = np.asarray(structure.sigma, float)[None, :]
    rho_m = rho_s if rho is None else np.broadcast_to(np.asarray(rho, float), grid.shape)
    sigma_m = sigma_s if sigma is None else np.broadcast_to(np.asarray(sigma, float), grid.shape)
    em = np.exp(-s.omega)
    cu = (em * rho_m)[..., None] * Pv
    cv = (eps * em * sigma_m)[..., None] * Pu
    states, disc, loc = march_certified(_vector_rhs, [np.zeros(3)], [cu], [cv], grid.du, grid.dv)
    Fs = states[0]
    h = max(grid.du, grid.dv)
    scale = max(1.0, float(np.abs(Fs).max()))
    bound = tol("path_h2") * h ** 2 * scale
    cert = {"discrepancy": disc, "location": loc, "bound": bound, "pass": disc <= bound}
    if strict and not cert["pass"]:
        raise InvariantError(f"Christoffel path discrepancy {disc:.3e} exceeds {bound:.3e} at {loc}: "
                             "input is not isothermic with this structure")
    q = np.broadcast_to(np.asarray(structure.q, float), grid.shape)
    meta = dict(s.meta, christoffel=True, path_discrepancy=disc)
    dual = SurfaceData(grid, -s.omega + np.log(rho_s * sigma_s), rho_s * s.H / 2.0,
                       eps * sigma_s * s.H / 2.0, q, 0,
                       isothermal="standard" if eps == 1 else "anti", meta=meta)
    out = ImmersionGrid.from_coords("E31", grid, Fs, imm.normals, meta)
    return out, dual, cert


# dual Bonnet data -------------------------------------------------------------

def structure_from_case1(data, real, theta):
    """(eps, theta)-isothermic structure of reconstructed Hazzidakis data.

    With Q = (eps q + theta)/rho and R = (q - eps theta)/sigma this is
    q_iso = 2 eps q, theta_iso = 2 theta, rho_iso = 1/rho, sigma_iso = 1/sigma.
    """
    eps = real.eps
    rho = 1.0 / np.asarray(real.rho, float)
    sigma = 1.0 / np.asarray(real.sigma, float)
    # Q/rho + eps R/sigma = q_iso: the theta terms cancel
    q_iso = IsothermicStructure.recover_q(data.Q, data.R, rho, sigma, eps)
    return IsothermicStructure(eps, 2.0 * theta, q_iso, rho, sigma)


def dual_bonnet_data(s, structure):
    """Data-level dual of (eps, theta)-isothermic Minkowski data with rho = sigma = 1.

    e^omega* = e^-omega (anti isothermal when eps = -1), H* = q,
    Q* = H/2, R* = eps H/2.  These satisfy the structure equations with
    ambient curvature -theta^2.  For theta != 0 the result is rescaled by
    k = |theta| to curvature -1 (omega + 2 log k, Q, R times k, H / k); the
    scale is recorded in ``meta``.  Returns (SurfaceData, report).
    """
    if s.c != 0:
        raise InvariantError("the dual is built from Minkowski data")
    if structure is None:
        raise InvariantError("an (eps, theta)-isothermic structure is required")
    if not (np.allclose(structure.rho, 1.0) and np.allclose(structure.sigma, 1.0)):
        raise InvariantError("the dual formulas use the normalisation rho = sigma = 1")
    structure.check(s)
    eps, theta = structure.eps, structure.theta
    q = np.broadcast_to(np.asarray(structure.q, float), s.grid.shape)
    sign = eps * s.sign
    isothermal = "standard" if sign > 0 else "anti"
    stated = ("H31" if eps == 1 else "S31") if theta != 0 else "E31"
    derived = "H31" if theta != 0 else "E31"
    report = {"stated_ambient": stated, "ambient": derived, "curvature": -theta ** 2 if theta else 0.0,
              "ambient_matches_statement": stated == derived,
              "bonnet_dual_of_thimc": s.f is not None}
    if theta == 0:
        data = SurfaceData(s.grid, -s.omega, s.H / 2.0, eps * s.H / 2.0, q, 0,
                           isothermal=isothermal, meta=dict(s.meta, dual=True))
        return data, report
    k = abs(theta)
    report.update(radius=1.0 / k, scale=k)
    data = SurfaceData(s.grid, -s.omega + 2.0 * np.log(k), k * s.H / 2.0, k * eps * s.H / 2.0,
                       q / k, -1, isothermal=isothermal,
                       meta=dict(s.meta, dual=True, scale=k, radius=1.0 / k))
    return data, report
