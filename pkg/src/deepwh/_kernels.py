"""Shared integrals for the alpha > 1 regime.

Writing y = t - 1, the two-sided exit integral is

    Phibar_{p,q}(1 + Y) = int_0^Y y^(p-1) (y+2)^(q-1) dy,      p + q = alpha.

The corrected potential entries combine a power term with (alpha-1)*Phibar:

    D_{p,q}(Y) = Y^(p-1) (Y+2)^q     - (alpha-1) Phibar_{p,q}(1+Y)
    O_{p,q}(Y) = Y^p     (Y+2)^(q-1) - (alpha-1) Phibar_{p,q}(1+Y)

Both terms grow like Y^(alpha-1) while the differences stay bounded, so for
large Y the subtraction is replaced by the derivative identities

    D'(Y) = -2 (1-p) Y^(p-2) (Y+2)^(q-1),   O'(Y) = 2 (1-q) Y^(p-1) (Y+2)^(q-2),

which give D and O as a limit value plus a convergent tail integral, with
no cancellation and manifest signs (D decreasing, O increasing from 0).

Every function accepts an array of Y and evaluates all of them with one
vector-valued quadrature on [0, 1] after scaling the integration variable.
"""

from __future__ import annotations

import math

import numpy as np

from .specfun import quad_adaptive

# Below this Y the direct difference loses at most a digit.
_Y_SWITCH = 2.0
_RTOL = 1e-13
_CHUNK = 4096


def _vector_quad(fn, Y, lo_exp):
    """int_0^1 s^lo_exp fn(s[:, None], Y[None, :]) ds for each entry of Y."""
    out = np.empty(Y.size)
    for k in range(0, Y.size, _CHUNK):
        yy = Y[k : k + _CHUNK]
        res = quad_adaptive(
            lambda s: fn(s[:, None], yy[None, :]), 0.0, 1.0, 0.0, rtol=_RTOL,
            lo_exp=lo_exp, weighted=lo_exp is not None,
        ).value
        out[k : k + _CHUNK] = res
    return out


def _scalar_out(fn):
    def wrapped(Y, p, q):
        arr = np.asarray(Y, dtype=float)
        out = fn(arr.ravel(), float(p), float(q)).reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


def _phibar_small(Y, p, q):
    # Y^p int_0^1 s^(p-1) (Ys+2)^(q-1) ds
    return Y ** p * _vector_quad(lambda s, y: (y * s + 2.0) ** (q - 1.0), Y, p - 1.0)


def _phibar_large(Y, p, q):
    # head over [0, 1] plus y = e^v on [0, log Y] with v = s log Y
    head = _phibar_small(np.array([1.0]), p, q)[0]
    L = np.log(Y)
    body = L * _vector_quad(lambda s, y: np.exp(p * s * y) * (np.exp(s * y) + 2.0) ** (q - 1.0), L, None)
    return head + body


@_scalar_out
def phibar_y(Y, p, q):
    """int_0^Y y^(p-1) (y+2)^(q-1) dy for Y >= 0 and 0 < p < 1."""
    out = np.zeros(Y.size)
    small = (Y > 0.0) & (Y <= _Y_SWITCH)
    large = Y > _Y_SWITCH
    if small.any():
        out[small] = _phibar_small(Y[small], p, q)
    if large.any():
        out[large] = _phibar_large(Y[large], p, q)
    return out


def _tail_integral(Y, alpha, expo):
    """Y^(alpha-2) int_0^1 s^(1-alpha) (1 + 2s/Y)^expo ds.

    Equals int_Y^inf y^(p-2) (y+2)^(q-1) dy for expo = q-1 (the D tail) and
    int_Y^inf y^(p-1) (y+2)^(q-2) dy for expo = q-2 (the O tail), via y = Y/s.
    """
    return Y ** (alpha - 2.0) * _vector_quad(lambda s, y: (1.0 + 2.0 * s / y) ** expo, Y, 1.0 - alpha)


def o_limit(p: float, q: float) -> float:
    """lim_{Y->inf} O_{p,q}(Y) = (1-q) 2^(alpha-1) B(p, 2-alpha).

    D has the same limit because D - O = 2 Y^(p-1) (Y+2)^(q-1) -> 0.
    """
    alpha = p + q
    beta = math.gamma(p) * math.gamma(2.0 - alpha) / math.gamma(2.0 - q)
    return (1.0 - q) * 2.0 ** (alpha - 1.0) * beta


@_scalar_out
def d_scaled(Y, p, q):
    """Y^(1-p) D_{p,q}(Y) for Y >= 0, finite at Y = 0 where it equals 2^q."""
    alpha = p + q
    out = np.empty(Y.size)
    small = Y <= _Y_SWITCH
    if small.any():
        ys = Y[small]
        # Y^(1-p) Phibar = Y int_0^1 s^(p-1) (Ys+2)^(q-1) ds
        ph = _vector_quad(lambda s, y: (y * s + 2.0) ** (q - 1.0), ys, p - 1.0)
        out[small] = (ys + 2.0) ** q - (alpha - 1.0) * ys * ph
    large = ~small
    if large.any():
        yl = Y[large]
        out[large] = yl ** (1.0 - p) * (o_limit(p, q) + 2.0 * (1.0 - p) * _tail_integral(yl, alpha, q - 1.0))
    return out


@_scalar_out
def d_corrected(Y, p, q):
    """D_{p,q}(Y) for Y > 0 (alpha = p + q > 1)."""
    alpha = p + q
    out = np.empty(Y.size)
    small = Y <= _Y_SWITCH
    if small.any():
        ys = Y[small]
        out[small] = ys ** (p - 1.0) * (ys + 2.0) ** q - (alpha - 1.0) * _phibar_small(ys, p, q)
    large = ~small
    if large.any():
        out[large] = o_limit(p, q) + 2.0 * (1.0 - p) * _tail_integral(Y[large], alpha, q - 1.0)
    return out


@_scalar_out
def o_corrected(Y, p, q):
    """O_{p,q}(Y) for Y >= 0 (alpha = p + q > 1)."""
    alpha = p + q
    out = np.zeros(Y.size)
    small = (Y > 0.0) & (Y <= _Y_SWITCH)
    if small.any():
        ys = Y[small]
        # O(Y) = 2 (1-q) int_0^Y y^(p-1) (y+2)^(q-2) dy, free of cancellation
        out[small] = 2.0 * (1.0 - q) * ys ** p * _vector_quad(lambda s, y: (y * s + 2.0) ** (q - 2.0), ys, p - 1.0)
    large = Y > _Y_SWITCH
    if large.any():
        out[large] = o_limit(p, q) - 2.0 * (1.0 - q) * _tail_integral(Y[large], alpha, q - 2.0)
    return out
