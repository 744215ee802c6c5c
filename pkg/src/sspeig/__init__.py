"""Structure-preserving eigensolver for large sparse real skew-symmetric matrices.

Computes the dominant complex-conjugate eigenpairs (+-i*sigma, sqrt(2)/2
(u +- i v)) in real arithmetic by alternating multiplication with S and
S.T = -S, with rank-2i deflation for several pairs, verified against a
dense structured spectral oracle.
"""

from .diagnostics import (
    EnvelopeTable,
    envelope_table,
    envelope_violation,
    figure2_data,
    rate_doubling_slope,
    residual_curves,
)
from .errors import (
    BreakdownError,
    DimensionMismatchError,
    MatrixMarketError,
    NotSkewSymmetricError,
    OracleError,
    SkewEigError,
    UnsupportedFormatError,
)
from .generators import ConvectionSpec, embed_block, generate_convection, skew_symmetrize
from .io import (
    MatrixMarketData,
    MatrixMarketHeader,
    SolveReport,
    StageReport,
    mm_read,
    mm_write,
    trace_export,
)
from .operators import (
    ConvectionOperator,
    DeflatedOperator,
    DeflationSet,
    DenseSkewOperator,
    SkewOperator,
    SparseSkewOperator,
    deflate,
    matvec,
    matvec_transpose,
)
from .oracle import StructuredSpectrum, eigspace_angle, oracle_spectrum
from .solvers import (
    AngleDiagnostics,
    ConvergenceTrace,
    DeflatedSolveResult,
    EigenpairApprox,
    PowerResult,
    SolveConfig,
    angle_diagnostics,
    convergence_rate,
    convergence_rates,
    power_method,
    residual_norm,
    ssp_solve,
    ssp_solve_many,
    tan_angle_to_line,
)

__version__ = "0.1.0"

__all__ = [
    "AngleDiagnostics",
    "BreakdownError",
    "ConvectionOperator",
    "ConvectionSpec",
    "ConvergenceTrace",
    "DeflatedOperator",
    "DeflatedSolveResult",
    "DeflationSet",
    "DenseSkewOperator",
    "DimensionMismatchError",
    "EigenpairApprox",
    "EnvelopeTable",
    "MatrixMarketData",
    "MatrixMarketError",
    "MatrixMarketHeader",
    "NotSkewSymmetricError",
    "OracleError",
    "PowerResult",
    "SkewEigError",
    "SkewOperator",
    "SolveConfig",
    "SolveReport",
    "SparseSkewOperator",
    "StageReport",
    "StructuredSpectrum",
    "UnsupportedFormatError",
    "angle_diagnostics",
    "convergence_rate",
    "convergence_rates",
    "deflate",
    "eigspace_angle",
    "embed_block",
    "envelope_table",
    "envelope_violation",
    "figure2_data",
    "generate_convection",
    "matvec",
    "matvec_transpose",
    "mm_read",
    "mm_write",
    "oracle_spectrum",
    "power_method",
    "rate_doubling_slope",
    "residual_curves",
    "residual_norm",
    "skew_symmetrize",
    "ssp_solve",
    "ssp_solve_many",
    "tan_angle_to_line",
    "trace_export",
]
