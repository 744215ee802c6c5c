"""Exception types raised across the library."""


class SkewEigError(Exception):
    """Base class for all library-specific errors."""


class DimensionMismatchError(SkewEigError):
    """Raised when a vector or matrix has an incompatible shape."""


class NotSkewSymmetricError(SkewEigError):
    """Raised when input data fails the skew-symmetry contract."""


class BreakdownError(SkewEigError):
    """Raised when an iterate is annihilated by the operator.

    This happens only when the current vector lies in the null space of the
    operator, i.e. for a singular matrix or a fully deficient start.
    """


class OracleError(SkewEigError):
    """Raised when the dense reference decomposition cannot be completed."""


class MatrixMarketError(SkewEigError):
    """Raised on malformed Matrix Market input; message carries the line number."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class UnsupportedFormatError(MatrixMarketError):
    """Raised for valid Matrix Market files this library does not handle."""
