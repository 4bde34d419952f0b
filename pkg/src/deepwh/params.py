"""Stable-process parameters and the (+1, -1) sign-indexed 2x2 matrices."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RegimeError

__all__ = ["Regime", "StableParams", "SIGNS", "sign_index", "sign_matrix", "mirror"]

# Row/column order of every 2x2 matrix in the package.
SIGNS = (+1, -1)


class Regime(enum.Enum):
    LOW = "low"  # alpha < 1, transient
    CAUCHY = "cauchy"  # alpha == 1, symmetric Cauchy only
    HIGH = "high"  # alpha > 1, recurrent, hits points


@dataclass(frozen=True)
class StableParams:
    """Index alpha and positivity parameter rho = P(X_1 >= 0) of a stable process.

    ``rho_hat`` defaults to ``1 - rho`` and is stored as given so that swapped
    parameter sets reproduce exactly. Spectrally one-sided cases
    (alpha*rho or alpha*rho_hat equal to 1) are rejected.
    """

    alpha: float
    rho: float
    rho_hat: float | None = None

    def __post_init__(self):
        alpha = float(self.alpha)
        rho = float(self.rho)
        rho_hat = 1.0 - rho if self.rho_hat is None else float(self.rho_hat)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "rho_hat", rho_hat)
        if not (0.0 < alpha < 2.0) or math.isnan(alpha):
            raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
        if not (0.0 < rho < 1.0):
            raise DomainError(f"rho must lie in (0, 1), got {rho}")
        if abs(rho + rho_hat - 1.0) > 1e-15:
            raise DomainError(f"rho + rho_hat must equal 1, got {rho} + {rho_hat}")
        if not (alpha * rho < 1.0 and alpha * rho_hat < 1.0):
            raise DomainError(
                f"alpha*rho and alpha*rho_hat must be < 1 (got {alpha * rho}, {alpha * rho_hat})"
            )
        if alpha == 1.0 and rho != 0.5:
            raise DomainError("alpha = 1 is supported only for the symmetric Cauchy case rho = 1/2")

    @property
    def regime(self) -> Regime:
        if self.alpha < 1.0:
            return Regime.LOW
        if self.alpha == 1.0:
            return Regime.CAUCHY
        return Regime.HIGH

    @property
    def a_rho(self) -> float:
        """alpha * rho"""
        return self.alpha * self.rho

    @property
    def a_rho_hat(self) -> float:
        """alpha * rho_hat"""
        return self.alpha * self.rho_hat

    def swapped(self) -> "StableParams":
        """Parameters of the dual process -X (rho and rho_hat exchanged)."""
        return StableParams(self.alpha, self.rho_hat, self.rho)

    def require(self, *regimes: Regime) -> None:
        if self.regime not in regimes:
            names = ", ".join(r.name for r in regimes)
            raise RegimeError(f"operation needs regime {names}, got {self.regime.name} (alpha={self.alpha})")


def sign_index(i: int) -> int:
    """Array index of sign state ``i`` in the fixed (+1, -1) order."""
    if i == 1:
        return 0
    if i == -1:
        return 1
    raise ValueError(f"sign state must be +1 or -1, got {i}")


def sign_matrix(pp, pm, mp, mm, dtype=float) -> np.ndarray:
    """Assemble a 2x2 matrix from entries in (+,+), (+,-), (-,+), (-,-) order."""
    return np.array([[pp, pm], [mp, mm]], dtype=dtype)


def mirror(m: np.ndarray) -> np.ndarray:
    """Relabel states i -> -i, i.e. entry (i, j) moves to (-i, -j)."""
    return np.asarray(m)[..., ::-1, ::-1]
