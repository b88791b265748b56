"""Two-pass RK4 march of a first-order system over a null grid.

A state ``Y`` (a list of arrays) is carried from the base node by

    dY/du = rhs(Y, coef_u),   dY/dv = rhs(Y, coef_v)

where the coefficient arrays are sampled at the grid nodes and linearly
interpolated at the RK4 midpoints.  The primary path goes along the first
v-row in u and then up every u-line in v; the certificate path goes the
other way round.  Their largest difference measures path dependence.
"""
import numpy as np

from .config import RENORM_EVERY


def _axpy(y, h, k):
    return [a + h * b for a, b in zip(y, k)]


def _rk4(rhs, y, h, cA, cB):
    cM = [0.5 * (a + b) for a, b in zip(cA, cB)]
    k1 = rhs(y, cA)
    k2 = rhs(_axpy(y, 0.5 * h, k1), cM)
    k3 = rhs(_axpy(y, 0.5 * h, k2), cM)
    k4 = rhs(_axpy(y, h, k3), cB)
    return [a + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def _sweep(rhs, y0, coef, h, renorm, axis_len, take):
    """March along one axis; ``take(k)`` returns the coefficient slice at index k."""
    out = [[a] for a in y0]
    y = y0
    for k in range(axis_len - 1):
        y = _rk4(rhs, y, h, take(k), take(k + 1))
        if renorm is not None and (k + 1) % RENORM_EVERY == 0:
            y = renorm(y)
        for store, a in zip(out, y):
            store.append(a)
    return [np.stack(s, axis=0) for s in out]


def march(rhs, y0, coef_u, coef_v, du, dv, renorm=None, first="u"):
    """Integrate over the whole grid.  Returns a list of arrays shaped (nu, nv, ...)."""
    nu, nv = coef_u[0].shape[:2]
    y0 = [np.asarray(a) for a in y0]
    if first == "u":
        edge = _sweep(rhs, y0, coef_u, du, renorm, nu, lambda k: [c[k, 0] for c in coef_u])
        lines = _sweep(rhs, edge, coef_v, dv, renorm, nv, lambda k: [c[:, k] for c in coef_v])
        return [np.moveaxis(a, 0, 1) for a in lines]
    edge = _sweep(rhs, y0, coef_v, dv, renorm, nv, lambda k: [c[0, k] for c in coef_v])
    return _sweep(rhs, edge, coef_u, du, renorm, nu, lambda k: [c[k, :] for c in coef_u])


def march_certified(rhs, y0, coef_u, coef_v, du, dv, renorm=None):
    """Primary march plus the reversed-order certificate.

    Returns ``(states, discrepancy, location)`` where the discrepancy is the
    largest entrywise difference of the first state component.
    """
    a = march(rhs, y0, coef_u, coef_v, du, dv, renorm, "u")
    b = march(rhs, y0, coef_u, coef_v, du, dv, renorm, "v")
    diff = np.abs(a[0] - b[0]).reshape(a[0].shape[0], a[0].shape[1], -1).max(axis=-1)
    loc = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return a, float(diff.max()), tuple(int(k) for k in loc)
