"""Wiener-Hopf factors and fluctuation identities of stable processes via the Lamperti-Kiu representation."""

from .params import Regime, StableParams

__version__ = "0.1.0"

__all__ = ["Regime", "StableParams", "__version__"]
