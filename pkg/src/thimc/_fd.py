"""Finite-difference stencils on uniform node-centred grids.

Interior nodes use centred stencils, boundary nodes one-sided stencils of the
same formal order.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _weights(offsets, deriv):
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    A = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return tuple(np.linalg.solve(A, rhs))


def _stencil_offsets(i, n, deriv, order):
    width = deriv + order - 1 if deriv > 0 else order
    half = (deriv + order - 1) // 2
    if half <= i <= n - 1 - half:
        return tuple(range(-half, half + 1))
    width = deriv + order
    start = 0 if i < half else n - width
    return tuple(k - i for k in range(start, start + width))


def derivative(a, h, axis=0, deriv=1, order=2):
    """``deriv``-th derivative of ``a`` along ``axis`` with formal accuracy ``order``."""
    a = np.asarray(a)
    n = a.shape[axis]
    need = deriv + order
    if n < need:
        raise ValueError(f"need at least {need} nodes along axis {axis}, got {n}")
    a = np.moveaxis(a, axis, 0)
    out = np.empty_like(a, dtype=np.result_type(a, float))
    half = (deriv + order - 1) // 2
    centred = _weights(tuple(range(-half, half + 1)), deriv)
    interior = slice(half, n - half)
    acc = 0
    for w, k in zip(centred, range(-half, half + 1)):
        acc = acc + w * a[half + k:n - half + k]
    out[interior] = acc
    for i in list(range(half)) + list(range(n - half, n)):
        offs = _stencil_offsets(i, n, deriv, order)
        w = _weights(offs, deriv)
        out[i] = sum(wk * a[i + k] for wk, k in zip(w, offs))
    return np.moveaxis(out / h ** deriv, 0, axis)


def d_u(a, h, order=2):
    return derivative(a, h, axis=0, deriv=1, order=order)


def d_v(a, h, order=2):
    return derivative(a, h, axis=1, deriv=1, order=order)


def d_uu(a, h, order=2):
    return derivative(a, h, axis=0, deriv=2, order=order)


def d_vv(a, h, order=2):
    return derivative(a, h, axis=1, deriv=2, order=order)


def d_uv(a, hu, hv, order=2):
    return derivative(derivative(a, hu, axis=0, order=order), hv, axis=1, order=order)


def interior(a, width=1):
    """Strip ``width`` boundary layers from the two leading (grid) axes."""
    return a[width:-width, width:-width]


def observed_order(errors, ratio=2.0):
    """Observed convergence orders between successive refinements."""
    e = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(e[:-1] / e[1:]) / np.log(ratio)
