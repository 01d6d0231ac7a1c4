"""Exception hierarchy.

Input problems raise ValueError (or a subclass of FsarError that is not a
FsarNumericalError).  Failures of the numerical machinery raise subclasses
of FsarNumericalError; the command line maps those to exit code 3.
"""


class FsarError(Exception):
    """Base class for errors raised by this package."""


class FsarNumericalError(FsarError):
    """A numerical operation failed or the problem is degenerate."""


class DegenerateBasisError(FsarNumericalError):
    """Quadrature Gram matrix of a basis is singular on the given grid."""


class IsolatedRegionError(FsarNumericalError):
    """A region has no neighbors, so its row cannot be standardized."""


class UnboundedIntervalError(FsarNumericalError):
    """The spectrum does not straddle zero, so no finite rho interval exists."""


class RhoOutOfBoundsError(FsarNumericalError):
    """rho lies outside the admissible interval (with safety margin)."""


class SingularDesignError(FsarNumericalError):
    """The coefficient design matrix is rank deficient."""


class DegenerateResidualError(FsarNumericalError):
    """The rho update is undefined because W annihilates the residual."""


class InsufficientDofError(FsarNumericalError):
    """No residual degrees of freedom are left for variance estimation."""


class SingularInformationError(FsarNumericalError):
    """The information matrix of the slope coefficients is singular."""


class DeterminantSignError(FsarNumericalError):
    """det(I - rho W) is not positive; rho is outside the admissible range."""


class IllConditionedError(FsarNumericalError):
    """A linear system is too ill conditioned to solve reliably."""


class DegenerateCovarianceError(FsarNumericalError):
    """The empirical covariance operator has no usable eigenvalues."""


class RankDeficientError(FsarNumericalError):
    """Requested dimension exceeds the numerical rank of the operator."""


class InvalidFitError(FsarNumericalError):
    """A fit object carries values that are unusable downstream."""


class KernelDegenerateError(FsarNumericalError):
    """A simulation covariance kernel is not positive definite."""


class DegenerateGeometryWarning(UserWarning):
    """Coordinates contain duplicates; neighbor ties are broken by index."""
