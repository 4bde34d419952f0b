"""Exception types shared by the numerical kernels and the simulation layer."""


class DeepWHError(Exception):
    """Base class for all package errors."""


class DomainError(DeepWHError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class PoleError(DomainError):
    """Evaluation at (or on top of) a pole of a meromorphic function."""


class DivergenceError(DomainError):
    """A series or integral does not converge for the requested arguments."""


class RegimeError(DomainError):
    """An operation was requested for a stability regime it does not support."""


class SupportError(DomainError):
    """A density was evaluated outside its support."""


class SingularMatrixError(DeepWHError, ArithmeticError):
    """A 2x2 matrix that must be inverted is numerically singular."""


class QuadratureError(DeepWHError, RuntimeError):
    """Adaptive quadrature failed to reach its tolerance or met a NaN."""


class InsufficientSamplesError(DeepWHError, ValueError):
    """A statistical test was given fewer samples than it requires."""
