"""Exception hierarchy shared across the package."""


class MatrixBetaError(Exception):
    """Base class for all package errors."""


class DomainError(MatrixBetaError):
    """Argument outside the mathematical domain of the operation."""


class NotPositiveDefinite(MatrixBetaError):
    """Matrix is not positive definite (Cholesky pivot failed)."""


class ComplexSpectrum(MatrixBetaError):
    """Eigenvalue has an imaginary part above tolerance."""


class NonPositiveRoot(MatrixBetaError):
    """Eigenvalue with non-positive real part where positivity is required."""


class DegenerateSpectrum(MatrixBetaError):
    """Eigenvalue gap below tolerance; formulas dividing by (l_i - l_j) are unusable."""


class MissingRaw(MatrixBetaError):
    """Definition-3 construction requested without the raw a x m factor."""


class RetryExhausted(MatrixBetaError):
    """Sampler hit the degenerate-spectrum retry cap."""


class SingularJacobian(MatrixBetaError):
    """Finite-difference Jacobian determinant is numerically zero."""


class NonFinite(MatrixBetaError):
    """Map returned NaN or Inf during finite differencing."""


class IllConditioned(MatrixBetaError):
    """Eigenvector matrix condition number exceeds the safety cap."""


class DegenerateBinning(MatrixBetaError):
    """Fewer than the minimum number of bins survive expected-count merging."""


class InsufficientRefs(MatrixBetaError):
    """Reference-point filtering left too few points for a volume estimate."""


class LowPower(MatrixBetaError):
    """Sample size too small for the requested experiment to be meaningful."""
