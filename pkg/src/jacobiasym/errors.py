"""Exception types raised by the library."""

__all__ = [
    "JacobiAsymError",
    "PoleAtEndpoint",
    "OutsideAnalyticRegion",
    "NoConvergence",
    "ContourTooClose",
    "InsufficientCoefficients",
    "InvalidDegree",
    "InsideDisk",
    "OutsideDisk",
    "NewtonStall",
    "DuplicateRoot",
    "DegreeExceedsTable",
    "NegativeSquare",
    "DomainError",
    "EigenFailure",
    "WeightDomainError",
    "RegionForcedOutsideValidity",
]


class JacobiAsymError(Exception):
    """Base class for all library errors."""


class PoleAtEndpoint(JacobiAsymError, ZeroDivisionError):
    """Weight evaluated at z = +-1 with a negative endpoint exponent."""


class OutsideAnalyticRegion(JacobiAsymError, ValueError):
    """Point lies outside the region where log h is analytic."""


class NoConvergence(JacobiAsymError, RuntimeError):
    """Successive doubling exhausted the point budget without stabilizing."""

    def __init__(self, msg, m_used=None, residual=None):
        super().__init__(msg)
        self.m_used = m_used
        self.residual = residual


class ContourTooClose(JacobiAsymError, ValueError):
    """Evaluation point too close to the integration contour to be trusted."""


class InsufficientCoefficients(JacobiAsymError, ValueError):
    """More Taylor coefficients requested than the table holds."""


class InvalidDegree(JacobiAsymError, ValueError):
    """Polynomial degree outside the supported range."""


class InsideDisk(JacobiAsymError, ValueError):
    """Outer-region quantity requested at a point inside an endpoint disk."""


class OutsideDisk(JacobiAsymError, ValueError):
    """Disk-region quantity requested at a point outside the disk."""


class NewtonStall(JacobiAsymError, RuntimeError):
    """Newton iteration for a quadrature node failed to converge."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class DuplicateRoot(JacobiAsymError, RuntimeError):
    """Two Newton iterates collapsed onto the same root."""


class DegreeExceedsTable(JacobiAsymError, ValueError):
    """Recurrence evaluation requested beyond the tabulated coefficients."""


class NegativeSquare(JacobiAsymError, ArithmeticError):
    """Truncated series for gamma_n^2 came out non-positive (n too small)."""


class DomainError(JacobiAsymError, ValueError):
    """Argument outside the validity domain of a special function."""


class EigenFailure(JacobiAsymError, RuntimeError):
    """Tridiagonal eigenvalue decomposition failed."""


class WeightDomainError(JacobiAsymError, ValueError):
    """Weight specification violates a positivity or analyticity condition."""


class RegionForcedOutsideValidity(UserWarning):
    """Caller forced a regional formula far outside its region of validity."""
