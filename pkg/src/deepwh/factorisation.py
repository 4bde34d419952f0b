"""Matrix Wiener-Hopf factors of the Lamperti-stable Markov additive process.

All matrices are 2x2 numpy arrays indexed by the modulator states in the
order (+1, -1). Normalisation: ``kappa_inv`` is the plain Psi matrix, while
``kappa_hat_inv`` and ``potential_u_hat`` carry the diagonal prefactor

    G = diag(Gamma(1 - a rho) / Gamma(a rho_hat), Gamma(1 - a rho_hat) / Gamma(a rho))

on the left, so that each potential density is the inverse Laplace transform
of the matching inverse factor entry by entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, RegimeError, SingularMatrixError
from .params import Regime, StableParams
from .specfun import log_gamma, psi, rgamma

__all__ = [
    "FactorDomain",
    "factor_domain",
    "map_exponent",
    "delta_pi",
    "gamma_prefactor",
    "kappa_inv",
    "kappa_hat_inv",
    "kappa",
    "kappa_hat",
    "potential_u",
    "potential_u_hat",
    "duality_transform_check",
    "factorisation_matrix",
]


@dataclass(frozen=True)
class FactorDomain:
    """Half-line (lambda_min, inf) on which a factor is defined, plus its poles."""

    lambda_min: float
    pole_set: tuple[float, ...]

    def contains(self, lam: float) -> bool:
        return lam > self.lambda_min


def factor_domain(which: str, p: StableParams) -> FactorDomain:
    """Domain of ``kappa_inv`` (``"ascending"``) or ``kappa_hat_inv`` (``"descending"``)."""
    a = p.alpha
    if which in ("ascending", "kappa_inv", "kappa"):
        poles = (0.0, 1.0 - a) if p.regime is Regime.HIGH else (0.0,)
        return FactorDomain(0.0, tuple(sorted(set(poles))))
    if which in ("descending", "kappa_hat_inv", "kappa_hat"):
        poles = (a - 1.0, 0.0) if p.regime is Regime.HIGH else (a - 1.0,)
        return FactorDomain(a - 1.0, tuple(sorted(set(poles))))
    raise ValueError(f"unknown factor {which!r}")


def map_exponent(z: complex, p: StableParams) -> np.ndarray:
    """Matrix exponent F(z) of the Lamperti-stable MAP on the strip -1 < Re z < alpha.

    Written with reciprocal gammas so the zeros of the diagonal entries (at
    z = alpha*rho_hat and z = alpha*rho) are evaluated without hitting a pole.
    """
    z = complex(z)
    a = p.alpha
    if not (-1.0 < z.real < a):
        raise DomainError(f"Re z = {z.real} outside the strip (-1, {a})")
    common = np.exp(log_gamma(a - z) + log_gamma(1.0 + z))
    arh, ar = p.a_rho_hat, p.a_rho
    f_pp = -common * rgamma(arh - z) * rgamma(1.0 - arh + z)
    f_pm = common * rgamma(arh) * rgamma(1.0 - arh)
    f_mp = common * rgamma(ar) * rgamma(1.0 - ar)
    f_mm = -common * rgamma(ar - z) * rgamma(1.0 - ar + z)
    return np.array([[f_pp, f_pm], [f_mp, f_mm]], dtype=complex)


def delta_pi(p: StableParams) -> np.ndarray:
    """diag(sin(pi a rho), sin(pi a rho_hat)), proportional to the modulator's stationary law."""
    return np.diag([math.sin(math.pi * p.a_rho), math.sin(math.pi * p.a_rho_hat)])


def gamma_prefactor(p: StableParams) -> np.ndarray:
    """The diagonal G carried on the left of the descending factor and potential."""
    ar, arh = p.a_rho, p.a_rho_hat
    return np.diag([math.gamma(1.0 - ar) / math.gamma(arh), math.gamma(1.0 - arh) / math.gamma(ar)])


def _check_lambda(lam, domain, experimental, name):
    if experimental:
        if lam <= domain.lambda_min - 1.0:
            raise DomainError(f"{name}: lambda={lam} beyond the continuation range")
        for pole in domain.pole_set:
            if lam == pole:
                raise DomainError(f"{name}: lambda={lam} is a pole")
        return
    if not domain.contains(lam):
        raise DomainError(f"{name} needs lambda > {domain.lambda_min}, got {lam}")


def kappa_inv(lam: float, p: StableParams, *, experimental: bool = False) -> np.ndarray:
    """Inverse ascending ladder exponent kappa^{-1}(lambda), lambda > 0.

    ``experimental=True`` continues the matrix to lambda in (-1, 0] through the
    hypergeometric form of Psi (used only by the alpha >= 1 factorisation check).
    """
    lam = float(lam)
    _check_lambda(lam, factor_domain("ascending", p), experimental, "kappa_inv")
    ar, arh = p.a_rho, p.a_rho_hat
    s = lam - 1.0
    m = np.array(
        [
            [psi(s, ar - 1.0, arh), psi(s, ar, arh - 1.0)],
            [psi(s, arh, ar - 1.0), psi(s, arh - 1.0, ar)],
        ]
    )
    if p.regime is Regime.HIGH:
        w = (p.alpha - 1.0) / (lam + p.alpha - 1.0)
        top = psi(s, ar - 1.0, arh - 1.0)
        bottom = psi(s, arh - 1.0, ar - 1.0)
        m -= w * np.array([[top, top], [bottom, bottom]])
    return m


def kappa_hat_inv(lam: float, p: StableParams, *, experimental: bool = False) -> np.ndarray:
    """Inverse descending ladder exponent, lambda > alpha - 1, with G folded in on the left."""
    lam = float(lam)
    _check_lambda(lam, factor_domain("descending", p), experimental, "kappa_hat_inv")
    ar, arh = p.a_rho, p.a_rho_hat
    s = lam - p.alpha
    m = np.array(
        [
            [psi(s, arh - 1.0, ar), psi(s, arh, ar - 1.0)],
            [psi(s, ar, arh - 1.0), psi(s, ar - 1.0, arh)],
        ]
    )
    if p.regime is Regime.HIGH:
        w = (p.alpha - 1.0) / lam
        top = psi(s, arh - 1.0, ar - 1.0)
        bottom = psi(s, ar - 1.0, arh - 1.0)
        m -= w * np.array([[top, top], [bottom, bottom]])
    return gamma_prefactor(p) @ m


def _inverse(m: np.ndarray, what: str) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = np.max(np.abs(m)) ** 2
    if not np.isfinite(det) or abs(det) <= 1e-13 * scale:
        raise SingularMatrixError(f"{what} is numerically singular (det={det:.3e})")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def kappa(lam: float, p: StableParams, *, experimental: bool = False) -> np.ndarray:
    """kappa(lambda) as the 2x2 inverse of ``kappa_inv``."""
    return _inverse(kappa_inv(lam, p, experimental=experimental), f"kappa_inv({lam})")


def kappa_hat(lam: float, p: StableParams, *, experimental: bool = False) -> np.ndarray:
    """kappa_hat(lambda) as the 2x2 inverse of ``kappa_hat_inv``."""
    return _inverse(kappa_hat_inv(lam, p, experimental=experimental), f"kappa_hat_inv({lam})")


def _as_x(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError("potential densities need x > 0")
    return arr


def _power_entries(x, e1, e2):
    """(1 - e^-x)^e1 (1 + e^-x)^e2 without cancellation near x = 0."""
    return np.exp(e1 * np.log(-np.expm1(-x)) + e2 * np.log1p(np.exp(-x)))


def _corrected(Y, kind, p_exp, q_exp):
    fn = _kernels.d_corrected if kind == "D" else _kernels.o_corrected
    return np.asarray(fn(Y, p_exp, q_exp), dtype=float)


def potential_u(x, p: StableParams) -> np.ndarray:
    """Ascending potential density u(x), x > 0; shape (..., 2, 2) for array x."""
    x = _as_x(x)
    ar, arh = p.a_rho, p.a_rho_hat
    if p.regime is Regime.HIGH:
        with np.errstate(over="ignore"):
            Y = np.expm1(x)
        decay = np.exp(-(p.alpha - 1.0) * x)
        pp = decay * _corrected(Y, "D", ar, arh)
        pm = decay * _corrected(Y, "O", ar, arh)
        mp = decay * _corrected(Y, "O", arh, ar)
        mm = decay * _corrected(Y, "D", arh, ar)
    else:
        pp = _power_entries(x, ar - 1.0, arh)
        pm = _power_entries(x, ar, arh - 1.0)
        mp = _power_entries(x, arh, ar - 1.0)
        mm = _power_entries(x, arh - 1.0, ar)
    return np.stack([np.stack([pp, pm], -1), np.stack([mp, mm], -1)], -2)


def potential_u_hat(x, p: StableParams) -> np.ndarray:
    """Descending potential density u_hat(x), x > 0, with G folded in on the left."""
    x = _as_x(x)
    ar, arh = p.a_rho, p.a_rho_hat
    if p.regime is Regime.HIGH:
        with np.errstate(over="ignore"):
            Y = np.expm1(x)
        pp = _corrected(Y, "D", arh, ar)
        pm = _corrected(Y, "O", arh, ar)
        mp = _corrected(Y, "O", ar, arh)
        mm = _corrected(Y, "D", ar, arh)
    else:
        # (e^x - 1)^e1 (e^x + 1)^e2 = e^{(e1+e2) x} (1 - e^-x)^e1 (1 + e^-x)^e2
        grow = np.exp((p.alpha - 1.0) * x)
        pp = grow * _power_entries(x, arh - 1.0, ar)
        pm = grow * _power_entries(x, arh, ar - 1.0)
        mp = grow * _power_entries(x, ar, arh - 1.0)
        mm = grow * _power_entries(x, ar - 1.0, arh)
    m = np.stack([np.stack([pp, pm], -1), np.stack([mp, mm], -1)], -2)
    g = np.diag(gamma_prefactor(p))
    return m * g[:, None]


def duality_transform_check(lam: float, p: StableParams) -> np.ndarray:
    """R(lambda) = A^{-1} B with A = kappa_hat_inv(lambda) and
    B = Delta^{-1} kappa_inv(lambda + 1 - alpha; rho <-> rho_hat) Delta.

    The two factors agree up to a positive diagonal matrix on the right, so R
    is diagonal, positive and independent of lambda.
    """
    lam = float(lam)
    if lam <= p.alpha - 1.0:
        raise DomainError(f"duality check needs lambda > alpha - 1, got {lam}")
    d = delta_pi(p)
    b = np.linalg.solve(d, kappa_inv(lam + 1.0 - p.alpha, p.swapped()) @ d)
    return _inverse(kappa_hat_inv(lam, p), f"kappa_hat_inv({lam})") @ b


def factorisation_matrix(z: float, p: StableParams, *, experimental: bool = False) -> np.ndarray:
    """M(z) = Delta kappa(-z) (-F(z))^{-1} Delta^{-1} kappa_hat(z)^T.

    For alpha < 1 and z in (alpha - 1, 0) this is diagonal and constant. For
    alpha >= 1 the real strips do not overlap and ``experimental=True`` uses
    continued factors on z in (alpha - 1, 1).
    """
    z = float(z)
    if p.regime is Regime.LOW:
        if not (p.alpha - 1.0 < z < 0.0):
            raise DomainError(f"z={z} outside ({p.alpha - 1.0}, 0)")
    else:
        if not experimental:
            raise RegimeError(
                "the real-line factorisation check needs alpha < 1; pass experimental=True "
                "to use the hypergeometric continuation"
            )
        if not (p.alpha - 1.0 < z < 1.0) or z == 0.0:
            raise DomainError(f"z={z} outside ({p.alpha - 1.0}, 1) or at 0")
    d = delta_pi(p)
    minus_f = -map_exponent(z, p).real
    k = kappa(-z, p, experimental=p.regime is not Regime.LOW)
    mid = np.linalg.solve(minus_f, np.linalg.solve(d, kappa_hat(z, p).T))
    return d @ k @ mid
