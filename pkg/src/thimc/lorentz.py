"""2x2 matrix models of the Lorentzian space forms.

* E31 is the Lie algebra sl2R of traceless real matrices,
  ``p1*I + p2*J + p3*K`` with the basis below.
* H31 is SL2R inside the real 2x2 matrices M2R.
* S31 is the set of Hermitian matrices with determinant -1.

All functions accept stacks of matrices with shape ``(..., 2, 2)``.
"""
import numpy as np

from .config import RENORM_EVERY, tol
from .errors import InvariantError

BASIS_I = np.array([[0.0, -1.0], [1.0, 0.0]])
BASIS_J = np.array([[0.0, 1.0], [1.0, 0.0]])
BASIS_K = np.array([[-1.0, 0.0], [0.0, 1.0]])
I_PRIME = np.array([[0.0, -1.0j], [1.0j, 0.0]])
IDENTITY = np.eye(2)

# Coordinate metrics of the three models.
METRIC_E31 = np.diag([-1.0, 1.0, 1.0])
METRIC_H31 = np.diag([-1.0, -1.0, 1.0, 1.0])
METRIC_S31 = np.diag([-1.0, 1.0, 1.0, 1.0])
METRICS = {"E31": METRIC_E31, "H31": METRIC_H31, "S31": METRIC_S31}


def det2(X):
    X = np.asarray(X)
    return X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]


def trace2(X):
    X = np.asarray(X)
    return X[..., 0, 0] + X[..., 1, 1]


def inv2(X):
    """Inverse of a stack of 2x2 matrices via the adjugate."""
    X = np.asarray(X)
    d = det2(X)
    if np.any(np.abs(d) < 1e-300):
        raise InvariantError("singular 2x2 matrix")
    adj = np.empty_like(X)
    adj[..., 0, 0] = X[..., 1, 1]
    adj[..., 1, 1] = X[..., 0, 0]
    adj[..., 0, 1] = -X[..., 0, 1]
    adj[..., 1, 0] = -X[..., 1, 0]
    return adj / d[..., None, None]


def dagger(X):
    return np.conj(np.swapaxes(np.asarray(X), -1, -2))


def check_sl2(g, eps=None, what="SL2 element"):
    eps = tol("det") if eps is None else eps
    drift = np.max(np.abs(det2(g) - 1.0), initial=0.0)
    if drift > eps:
        raise InvariantError(f"{what}: |det - 1| = {drift:.3e} exceeds {eps:.1e}")
    return drift


def is_hermitian(X, eps=None):
    eps = tol("hermitian") if eps is None else eps
    return bool(np.max(np.abs(np.asarray(X) - dagger(X)), initial=0.0) <= eps)


def embed_e31(p):
    """(p1, p2, p3) -> p1*I + p2*J + p3*K."""
    p = np.asarray(p, dtype=float)
    return (p[..., 0, None, None] * BASIS_I + p[..., 1, None, None] * BASIS_J
            + p[..., 2, None, None] * BASIS_K)


def extract_e31(X):
    X = np.asarray(X)
    p1 = (X[..., 1, 0] - X[..., 0, 1]) / 2
    p2 = (X[..., 1, 0] + X[..., 0, 1]) / 2
    p3 = (X[..., 1, 1] - X[..., 0, 0]) / 2
    return np.stack([p1, p2, p3], axis=-1).real


def embed_m2r(p):
    """(p0, p1, p2, p3) -> real matrix; p0 is the identity component."""
    p = np.asarray(p, dtype=float)
    return p[..., 0, None, None] * IDENTITY + embed_e31(p[..., 1:])


def extract_m2r(X):
    X = np.asarray(X)
    p0 = (X[..., 0, 0] + X[..., 1, 1]) / 2
    return np.concatenate([p0[..., None].real, extract_e31(X)], axis=-1)


def embed_herm(p):
    """(p0, p1, p2, p3) -> [[p0+p1, p3-i p2], [p3+i p2, p0-p1]]."""
    p = np.asarray(p, dtype=float)
    out = np.empty(p.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = p[..., 0] + p[..., 1]
    out[..., 1, 1] = p[..., 0] - p[..., 1]
    out[..., 0, 1] = p[..., 3] - 1j * p[..., 2]
    out[..., 1, 0] = p[..., 3] + 1j * p[..., 2]
    return out


def extract_herm(X):
    X = np.asarray(X)
    p0 = (X[..., 0, 0] + X[..., 1, 1]).real / 2
    p1 = (X[..., 0, 0] - X[..., 1, 1]).real / 2
    p2 = (X[..., 1, 0] - X[..., 0, 1]).imag / 2
    p3 = (X[..., 1, 0] + X[..., 0, 1]).real / 2
    return np.stack([p0, p1, p2, p3], axis=-1)


def scalar_m2r(X, Y):
    """Polarisation of -det on M2R: (tr XY - tr X tr Y) / 2."""
    X, Y = np.asarray(X), np.asarray(Y)
    return 0.5 * (trace2(X @ Y) - trace2(X) * trace2(Y))


def scalar_herm(X, Y):
    """-(1/2) tr(i' X i' Y^T) on Hermitian matrices; equals -det on the diagonal."""
    if not (is_hermitian(X) and is_hermitian(Y)):
        raise InvariantError("scalar_herm needs Hermitian arguments")
    val = -0.5 * trace2(I_PRIME @ np.asarray(X) @ I_PRIME @ np.swapaxes(np.asarray(Y), -1, -2))
    return np.real(val)


def ad_action(a, X):
    """a X a^{-1}."""
    a = np.asarray(a)
    if np.any(np.abs(det2(a)) < 1e-300):
        raise InvariantError("ad_action: singular group element")
    return a @ np.asarray(X) @ inv2(a)


def proj_h(g1, g2, eps=None):
    """Point g1 g2^{-1} of H31."""
    check_sl2(g1, eps, "proj_h first argument")
    check_sl2(g2, eps, "proj_h second argument")
    return np.asarray(g1) @ inv2(g2)


def proj_s(g, eps=None):
    """Point g i' g* of S31."""
    check_sl2(g, eps, "proj_s argument")
    g = np.asarray(g)
    return g @ I_PRIME @ dagger(g)


def renormalize(g):
    """Rescale by det^{-1/2}; the principal root is used for complex stacks."""
    g = np.asarray(g)
    d = det2(g)
    if np.iscomplexobj(g):
        s = np.sqrt(d.astype(complex))
    else:
        if np.any(d <= 0):
            raise InvariantError("cannot renormalise a real matrix with det <= 0")
        s = np.sqrt(d)
    return g / s[..., None, None]


def compose(elements, renorm_every=RENORM_EVERY):
    """Left-to-right product of a sequence, renormalising every ``renorm_every`` steps."""
    out = None
    for k, e in enumerate(elements, 1):
        out = np.array(e) if out is None else out @ e
        if k % renorm_every == 0:
            out = renormalize(out)
    return out


def coords(X, ambient):
    """Coordinate vector of an ambient point or tangent vector."""
    if ambient == "E31":
        return extract_e31(X)
    if ambient == "H31":
        return extract_m2r(np.real(X))
    if ambient == "S31":
        return extract_herm(X)
    raise ValueError(f"unknown ambient {ambient!r}")


def from_coords(p, ambient):
    if ambient == "E31":
        return embed_e31(p)
    if ambient == "H31":
        return embed_m2r(p)
    if ambient == "S31":
        return embed_herm(p)
    raise ValueError(f"unknown ambient {ambient!r}")


def inner(p, q, ambient):
    """Scalar product of coordinate vectors in the given model."""
    return np.einsum("...i,ij,...j->...", p, METRICS[ambient], q)
