"""Scalar special-function kernels: log-gamma, 2F1 at -1, the Psi integral, quadrature.

Every closed form in the package is assembled from these pieces, so they are
written to hold roughly 13 significant digits over the parameter ranges the
factor matrices and densities request.
"""

from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergenceError, DomainError, PoleError, QuadratureError

__all__ = [
    "QuadResult",
    "PsiArgs",
    "quad_adaptive",
    "log_gamma",
    "gamma",
    "rgamma",
    "hyp2f1_neg1",
    "psi",
]

# ---------------------------------------------------------------------------
# Gauss-Kronrod 10/21 rule on [-1, 1]

_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208931502837,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full 21-point node/weight vectors, nodes ascending.
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_NODES.sort()
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_FULL = np.zeros(21)
_G_FULL[[1, 3, 5, 7, 9]] = _WG
_G_FULL[[19, 17, 15, 13, 11]] = _WG
GAUSS_WEIGHTS = _G_FULL
# Nodes mapped to [0, 1] once; panels rescale these.
_U01 = 0.5 * (GK_NODES + 1.0)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    """Outcome of :func:`quad_adaptive`.

    ``value`` is a float for scalar integrands and an array for vector ones.
    """

    value: float | np.ndarray
    abs_err_estimate: float
    evaluations: int


class _AnchoredPiece:
    """t = anchor +/- L w**p on w in (0, 1), anchored at one endpoint.

    Returns the abscissa, exact distances to both original endpoints and the
    Jacobian. ``p > 1`` flattens an endpoint power law; in weighted mode the
    factor (distance to anchor)**beta * Jacobian is formed analytically so
    nothing underflows however close beta is to -1.
    """

    def __init__(self, anchor, length, power, side, far, beta_near=None, beta_far=None):
        self.anchor = anchor
        self.length = length
        self.power = power
        self.side = side  # +1: anchored at lo, -1: anchored at hi
        self.far = far  # distance from the piece's far end to the other endpoint
        self.beta_near = beta_near
        self.beta_far = beta_far

    def __call__(self, w):
        p, L = self.power, self.length
        if p == 1.0:
            wp = w
            rest = 1.0 - w
            jac = np.full_like(w, L)
        else:
            logw = np.log(w)
            wp = np.exp(p * logw)
            rest = -np.expm1(p * logw)
            jac = L * p * np.exp((p - 1.0) * logw)
        near = L * wp
        other = self.far + L * rest
        if self.beta_near is None:
            factor = jac
        else:
            if p == 1.0:
                factor = jac * near ** self.beta_near
            else:
                # (L w^p)^beta * L p w^(p-1) with p = 1/(1+beta)
                factor = np.full_like(w, p * L ** (self.beta_near + 1.0))
            if self.beta_far:
                factor = factor * other ** self.beta_far
        if self.side > 0:
            return self.anchor + near, near, other, factor
        return self.anchor - near, other, near, factor


class _TailPiece:
    """t = start + s with s = 1/e - 1, e = w**p, covering [start, inf)."""

    def __init__(self, start, offset, power, beta_lo=None):
        self.start = start
        self.offset = offset
        self.power = power
        self.beta_lo = beta_lo

    def __call__(self, w):
        p = self.power
        e = w ** p
        s = 1.0 / e - 1.0
        factor = p * w ** (p - 1.0) / (e * e)
        d_lo = self.offset + s
        if self.beta_lo:
            factor = factor * d_lo ** self.beta_lo
        return self.start + s, d_lo, np.full_like(w, np.inf), factor


def _endpoint_power(beta):
    if beta is None or beta >= 0.0:
        return 1.0
    if beta <= -1.0:
        raise DomainError(f"endpoint exponent {beta} is not integrable")
    return 1.0 / (1.0 + beta)


def _build_pieces(lo, hi, lo_exp, hi_exp, weighted):
    inf_hi = math.isinf(hi)
    wl = lo_exp if weighted else None
    if not inf_hi:
        wh = hi_exp if weighted else None
        width = hi - lo
        p_lo = _endpoint_power(lo_exp)
        p_hi = _endpoint_power(hi_exp)
        if p_lo > 1.0 and p_hi > 1.0:
            half = 0.5 * width
            return [
                _AnchoredPiece(lo, half, p_lo, +1, width - half, wl, wh),
                _AnchoredPiece(hi, width - half, p_hi, -1, half, wh, wl),
            ]
        if p_hi > 1.0 or (weighted and hi_exp and not lo_exp):
            return [_AnchoredPiece(hi, width, p_hi, -1, 0.0, wh, wl)]
        return [_AnchoredPiece(lo, width, p_lo, +1, 0.0, wl, wh)]
    # Infinite upper limit: hi_exp is the power-law decay exponent of f.
    if hi_exp is None:
        p_tail = 1.0
    else:
        if hi_exp >= -1.0:
            raise DomainError(f"tail exponent {hi_exp} is not integrable")
        # after s = 1/e - 1 the integrand behaves like e**(-hi_exp - 2)
        p_tail = _endpoint_power(-hi_exp - 2.0)
    p_lo = _endpoint_power(lo_exp)
    if p_lo > 1.0 or (weighted and lo_exp):
        head = 1.0
        return [
            _AnchoredPiece(lo, head, p_lo, +1, np.inf, wl, None),
            _TailPiece(lo + head, head, p_tail, wl),
        ]
    return [_TailPiece(lo, 0.0, p_tail, wl)]


def quad_adaptive(
    f: Callable,
    lo: float,
    hi: float,
    tol: float = 1e-13,
    *,
    rtol: float = 1e-12,
    lo_exp: float | None = None,
    hi_exp: float | None = None,
    weighted: bool = False,
    gaps: bool = False,
    limit: int = 2000,
) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (10/21) quadrature of ``f`` over [lo, hi].

    ``f`` is called with a 1-D array of abscissae and must return an array whose
    first axis matches it; extra trailing axes integrate vector-valued
    functions componentwise. With ``gaps=True`` it is called as
    ``f(t, t - lo, hi - t)`` where the two distances are computed without
    cancellation.

    ``lo_exp`` / ``hi_exp`` declare endpoint behaviour ``(t-lo)**beta`` and
    ``(hi-t)**beta``; negative exponents trigger a power substitution that
    makes the transformed integrand bounded. With ``weighted=True`` the
    integrand is ``(t-lo)**lo_exp * (hi-t)**hi_exp * f(t)`` and the power
    factors are applied analytically, which is the only reliable option for
    exponents close to -1. When ``hi`` is infinite, ``hi_exp`` is instead the
    decay exponent of the integrand, ``~ t**hi_exp`` (``None`` means faster
    than any power), and is never applied as a weight.

    Stops when the summed error estimate is below ``max(tol, rtol*|value|)``.
    """
    lo = float(lo)
    hi = float(hi)
    if math.isinf(lo):
        raise DomainError("lower limit must be finite")
    if hi < lo:
        if math.isinf(lo):
            raise DomainError("lower limit must be finite")
        res = quad_adaptive(
            f, hi, lo, tol, rtol=rtol, lo_exp=hi_exp, hi_exp=lo_exp,
            weighted=weighted, gaps=gaps, limit=limit,
        )
        return QuadResult(-res.value, res.abs_err_estimate, res.evaluations)
    if hi == lo:
        return QuadResult(0.0, 0.0, 1)

    pieces = _build_pieces(lo, hi, lo_exp, hi_exp, weighted)
    evaluations = 0

    def evaluate(panels):
        nonlocal evaluations
        # panels sharing a piece are mapped in one vectorised call
        groups = {}
        for k, (piece, a, b) in enumerate(panels):
            groups.setdefault(id(piece), (piece, []))[1].append((k, a, b))
        n = len(panels)
        t = np.empty((n, 21))
        dl = np.empty((n, 21))
        dh = np.empty((n, 21))
        fac = np.empty((n, 21))
        for piece, members in groups.values():
            idx = [m[0] for m in members]
            a = np.array([m[1] for m in members])[:, None]
            b = np.array([m[2] for m in members])[:, None]
            tt, d_lo, d_hi, ff = piece(a + (b - a) * _U01)
            t[idx], dl[idx], dh[idx] = tt, d_lo, d_hi
            fac[idx] = ff * (0.5 * (b - a))
        flat = t.ravel()
        if gaps:
            vals = np.asarray(f(flat, dl.ravel(), dh.ravel()), dtype=float)
        else:
            vals = np.asarray(f(flat), dtype=float)
        evaluations += flat.size
        if vals.ndim == 0:
            vals = np.full(flat.shape, float(vals))
        extra = vals.shape[1:]
        gv = vals.reshape((n, 21) + extra) * fac.reshape((n, 21) + (1,) * len(extra))
        if not np.all(np.isfinite(gv)):
            if np.any(np.isnan(vals)):
                raise QuadratureError("integrand returned NaN")
            raise QuadratureError("integrand returned a non-finite value")
        kron = np.tensordot(gv, GK_WEIGHTS, axes=([1], [0]))
        gauss = np.tensordot(gv, GAUSS_WEIGHTS, axes=([1], [0]))
        # QUADPACK-style error scaling
        mean = 0.5 * kron
        resasc = np.tensordot(np.abs(gv - mean[:, None]), GK_WEIGHTS, axes=([1], [0]))
        resabs = np.tensordot(np.abs(gv), GK_WEIGHTS, axes=([1], [0]))
        raw = np.abs(kron - gauss)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = np.where(
                (resasc > 0.0) & (raw > 0.0),
                resasc * np.minimum(1.0, (200.0 * raw / np.where(resasc > 0, resasc, 1.0)) ** 1.5),
                raw,
            )
        scaled = np.maximum(scaled, 50.0 * _EPS * resabs)
        errs = scaled.reshape(n, -1).max(axis=1) if extra else scaled
        return [(float(errs[k]), kron[k] if extra else float(kron[k]), *panels[k]) for k in range(n)]

    heap = []
    counter = 0
    for err, val, piece, a, b in evaluate([(pc, 0.0, 1.0) for pc in pieces]):
        heapq.heappush(heap, (-err, counter, val, piece, a, b))
        counter += 1
    total = sum(item[2] for item in heap)
    total_err = sum(-item[0] for item in heap)

    n_panels = len(heap)
    while True:
        scale = float(np.max(np.abs(total)))
        if total_err <= max(tol, rtol * scale):
            break
        if n_panels >= limit:
            raise QuadratureError(
                f"no convergence after {n_panels} panels: value={total!r}, err={total_err:.3e}"
            )
        # split the worst panels together, enough to bring the rest under target
        target = max(tol, rtol * scale)
        batch = []
        remaining = total_err
        while heap and len(batch) < 16 and (remaining > target or not batch):
            neg_err, _, val, piece, a, b = heapq.heappop(heap)
            mid = 0.5 * (a + b)
            if not (a < mid < b):
                raise QuadratureError("panel width underflow")
            remaining += neg_err
            total = total - val
            total_err += neg_err
            batch.append((piece, a, mid))
            batch.append((piece, mid, b))
        for err, v, pc, aa, bb in evaluate(batch):
            heapq.heappush(heap, (-err, counter, v, pc, aa, bb))
            counter += 1
            total = total + v
            total_err += err
        n_panels += len(batch) // 2
        if counter % 64 < len(batch):
            # refresh the running sums to stop rounding drift
            total = sum(item[2] for item in heap)
            total_err = sum(-item[0] for item in heap)

    total = sum(item[2] for item in heap)
    total_err = sum(-item[0] for item in heap)
    value = float(total) if np.ndim(total) == 0 else np.asarray(total)
    return QuadResult(value, float(total_err), evaluations)


# ---------------------------------------------------------------------------
# Gamma function

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _lanczos_log_gamma(z: complex) -> complex:
    z = z - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z) for complex z.

    Uses a Lanczos approximation (g = 7) for Re z >= 1/2 and the upward
    recurrence Gamma(z) = Gamma(z + n) / (z (z+1) ... (z+n-1)) below that, so
    the branch cut sits on the negative real axis. For a negative real,
    non-integer z the imaginary part is a multiple of pi carrying the sign.
    """
    z = complex(z)
    if z.imag == 0.0 and _is_nonpositive_integer(z.real):
        raise PoleError(f"log_gamma has a pole at {z.real}")
    if z.real >= 0.5:
        return _lanczos_log_gamma(z)
    n = int(math.ceil(0.5 - z.real))
    shift = 0j
    w = z
    for _ in range(n):
        shift += cmath.log(w)
        w += 1.0
    return _lanczos_log_gamma(w) - shift


def gamma(x: float) -> float:
    """Real Gamma function; thin wrapper raising :class:`PoleError` at poles."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(z: complex) -> complex:
    """Reciprocal Gamma function 1/Gamma(z), an entire function (zero at poles)."""
    z = complex(z)
    if z.imag == 0.0 and _is_nonpositive_integer(z.real):
        return 0j
    if z.real >= 0.5:
        return cmath.exp(-_lanczos_log_gamma(z))
    # reflection: 1/Gamma(z) = Gamma(1 - z) sin(pi z) / pi
    return cmath.exp(_lanczos_log_gamma(1.0 - z)) * cmath.sin(math.pi * z) / math.pi


# ---------------------------------------------------------------------------
# 2F1 at argument -1


def _series_2f1(a, b, c, z, max_terms=20000):
    """Plain hypergeometric series; returns (sum, largest |term|)."""
    term = 1.0
    total = 1.0
    biggest = 1.0
    n = 0
    while True:
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        n += 1
        total += term
        at = abs(term)
        if at > biggest:
            biggest = at
        if term == 0.0:
            break
        if at <= 1e-17 * abs(total) and n > abs(a) + abs(b) + abs(c):
            break
        if n >= max_terms:
            raise DivergenceError("hypergeometric series did not converge")
    return total, biggest


def hyp2f1_neg1(p: float, q: float, r: float) -> float:
    """Gauss hypergeometric function 2F1(p, q; r; -1).

    Terminating series are summed directly. Otherwise the direct series at -1
    converges only algebraically, so both Pfaff transformations to argument
    1/2 are summed and the one with less cancellation is returned.
    """
    p, q, r = float(p), float(q), float(r)
    if _is_nonpositive_integer(r):
        raise PoleError(f"2F1 has a pole at r={r}")
    if r - p - q <= -1.0:
        raise DivergenceError(f"2F1(p,q;r;-1) diverges for r-p-q={r - p - q}")
    if p == 0.0 or q == 0.0:
        return 1.0
    if _is_nonpositive_integer(p) or _is_nonpositive_integer(q):
        total, _ = _series_2f1(p, q, r, -1.0)
        return total
    s1, big1 = _series_2f1(p, r - q, r, 0.5)
    s2, big2 = _series_2f1(r - p, q, r, 0.5)
    loss1 = big1 / abs(s1) if s1 != 0.0 else math.inf
    loss2 = big2 / abs(s2) if s2 != 0.0 else math.inf
    if loss1 <= loss2:
        return 2.0 ** (-p) * s1
    return 2.0 ** (-q) * s2


# ---------------------------------------------------------------------------
# Psi(a, b, c) = int_0^1 u^a (1-u)^b (1+u)^c du


@dataclass(frozen=True)
class PsiArgs:
    """Exponents (a, b, c) of the Psi integral."""

    a: float
    b: float
    c: float

    @property
    def integral_convergent(self) -> bool:
        return self.a > -1.0 and self.b > -1.0

    @property
    def continuation_valid(self) -> bool:
        return not _is_nonpositive_integer(self.a + 1.0) and self.b > -1.0


def _psi_quad(a, b, c, rtol=1e-13):
    def smooth(u):
        return np.exp(c * np.log1p(u))

    res = quad_adaptive(smooth, 0.0, 1.0, 0.0, rtol=rtol, lo_exp=a, hi_exp=b, weighted=True)
    return res.value


def _psi_hyp(a, b, c):
    r = a + b + 2.0
    pp, qq = -c, a + 1.0
    if _is_nonpositive_integer(r):
        # 1/Gamma(r) * 2F1(p, q; r; z) stays finite as r -> -m:
        # (p)_{m+1} (q)_{m+1} / (m+1)! * z^{m+1} * 2F1(p+m+1, q+m+1; m+2; z)
        m = int(-r)
        poch = 1.0
        for k in range(m + 1):
            poch *= (pp + k) * (qq + k) / (k + 1.0)
        reg = poch * (-1.0) ** (m + 1) * hyp2f1_neg1(pp + m + 1.0, qq + m + 1.0, m + 2.0)
        return math.gamma(a + 1.0) * math.gamma(b + 1.0) * reg
    pref = math.gamma(a + 1.0) * math.gamma(b + 1.0) / math.gamma(r)
    return pref * hyp2f1_neg1(pp, qq, r)


def psi(a, b: float | None = None, c: float | None = None, *, method: str = "auto") -> float:
    """Psi(a, b, c) = integral over (0, 1) of u^a (1-u)^b (1+u)^c.

    ``method`` is ``"quad"`` (adaptive quadrature, needs a, b > -1),
    ``"hyp"`` (Gamma ratio times 2F1 at -1, which also continues Psi
    analytically to a < -1 away from negative integers) or ``"auto"``, which
    uses quadrature where the integral converges and the continuation
    otherwise. Accepts a :class:`PsiArgs` as the first argument.
    """
    if isinstance(a, PsiArgs):
        args = a
    else:
        args = PsiArgs(float(a), float(b), float(c))
    a, b, c = args.a, args.b, args.c
    if method == "auto":
        method = "quad" if args.integral_convergent else "hyp"
    if method == "quad":
        if not args.integral_convergent:
            raise DomainError(f"Psi integral diverges for a={a}, b={b}")
        return _psi_quad(a, b, c)
    if method == "hyp":
        if not args.continuation_valid:
            raise DomainError(f"Psi is undefined for a={a}, b={b}")
        return _psi_hyp(a, b, c)
    raise ValueError(f"unknown method {method!r}")
