"""Matrix Market ingestion and result serialization.

The reader returns the stored triplets untouched; symmetry expansion is a
separate step so the same parse serves direct skew ingestion (lower
triangle only) and general matrices headed for skew-symmetrization.
Pattern entries are assigned the value 1.0.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import MatrixMarketError, UnsupportedFormatError

_BANNER = "%%matrixmarket"
_OBJECTS = {"matrix"}
_FORMATS = {"coordinate", "array"}
_FIELDS = {"real", "integer", "pattern", "complex"}
_SYMMETRIES = {"general", "symmetric", "skew-symmetric", "hermitian"}


@dataclass(frozen=True)
class MatrixMarketHeader:
    object: str
    format: str
    field: str
    symmetry: str


@dataclass
class MatrixMarketData:
    """Parsed file: header, shape, and stored triplets (0-based)."""

    header: MatrixMarketHeader
    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def to_sparse(self) -> sp.csr_array:
        """CSR matrix with the header's symmetry expanded."""
        rows, cols, vals = self.rows, self.cols, self.values
        if self.header.symmetry in ("symmetric", "skew-symmetric"):
            off = rows != cols
            sign = 1.0 if self.header.symmetry == "symmetric" else -1.0
            rows = np.concatenate([rows, cols[off]])
            cols = np.concatenate([cols, self.rows[off]])
            vals = np.concatenate([vals, sign * self.values[off]])
        return sp.coo_array(
            (vals, (rows, cols)), shape=(self.nrows, self.ncols)
        ).tocsr()


def _parse_banner(line: str) -> MatrixMarketHeader:
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0].lower() != _BANNER:
        raise MatrixMarketError(
            "malformed banner; expected "
            "'%%MatrixMarket matrix coordinate real general'-style header",
            lineno=1,
        )
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj not in _OBJECTS:
        raise MatrixMarketError(f"unknown object {obj!r}", lineno=1)
    if fmt not in _FORMATS:
        raise MatrixMarketError(f"unknown format {fmt!r}", lineno=1)
    if fld not in _FIELDS:
        raise MatrixMarketError(f"unknown field {fld!r}", lineno=1)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"unknown symmetry {sym!r}", lineno=1)
    if fld == "complex" or sym == "hermitian":
        raise UnsupportedFormatError(
            "complex-valued Matrix Market files are not supported", lineno=1
        )
    if fld == "pattern" and fmt == "array":
        raise MatrixMarketError("pattern field is invalid in array format", lineno=1)
    return MatrixMarketHeader(obj, fmt, fld, sym)


def _parse_int(token: str, what: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MatrixMarketError(f"bad {what} {token!r}", lineno=lineno) from None


def _parse_value(token: str, fld: str, lineno: int) -> float:
    try:
        if fld == "integer":
            return float(int(token))
        return float(token)
    except ValueError:
        raise MatrixMarketError(f"bad value {token!r}", lineno=lineno) from None


def mm_read(path) -> MatrixMarketData:
    """Parse a Matrix Market file into stored triplets.

    Skew-symmetric and symmetric files yield only the stored (lower)
    triangle; call :meth:`MatrixMarketData.to_sparse` to expand. Errors
    carry the 1-based line number of the offending line.
    """
    with open(path, "r", encoding="latin-1") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", lineno=1)
    header = _parse_banner(lines[0])

    body = [
        (lineno, line)
        for lineno, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixMarketError("missing size line", lineno=len(lines))

    size_lineno, size_line = body[0]
    tokens = size_line.split()
    square_required = header.symmetry in ("symmetric", "skew-symmetric")
    if header.format == "coordinate":
        if len(tokens) != 3:
            raise MatrixMarketError(
                "coordinate size line must be 'nrows ncols nnz'", lineno=size_lineno
            )
        nrows = _parse_int(tokens[0], "row count", size_lineno)
        ncols = _parse_int(tokens[1], "column count", size_lineno)
        nnz = _parse_int(tokens[2], "entry count", size_lineno)
    else:
        if len(tokens) != 2:
            raise MatrixMarketError(
                "array size line must be 'nrows ncols'", lineno=size_lineno
            )
        nrows = _parse_int(tokens[0], "row count", size_lineno)
        ncols = _parse_int(tokens[1], "column count", size_lineno)
        if header.symmetry == "symmetric":
            nnz = ncols * (ncols + 1) // 2
        elif header.symmetry == "skew-symmetric":
            nnz = ncols * (ncols - 1) // 2
        else:
            nnz = nrows * ncols
    if nrows < 0 or ncols < 0 or nnz < 0:
        raise MatrixMarketError("negative size", lineno=size_lineno)
    if square_required and nrows != ncols:
        raise MatrixMarketError(
            f"{header.symmetry} matrix must be square, got {nrows}x{ncols}",
            lineno=size_lineno,
        )

    entries = body[1:]
    if len(entries) < nnz:
        raise MatrixMarketError(
            f"expected {nnz} entries, found {len(entries)}",
            lineno=entries[-1][0] if entries else size_lineno,
        )
    if len(entries) > nnz:
        raise MatrixMarketError("trailing data after entries", lineno=entries[nnz][0])

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    values = np.empty(nnz, dtype=np.float64)

    if header.format == "coordinate":
        want = 2 if header.field == "pattern" else 3
        for k, (lineno, line) in enumerate(entries):
            tokens = line.split()
            if len(tokens) != want:
                raise MatrixMarketError(
                    f"expected {want} tokens on entry line, got {len(tokens)}",
                    lineno=lineno,
                )
            i = _parse_int(tokens[0], "row index", lineno)
            j = _parse_int(tokens[1], "column index", lineno)
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise MatrixMarketError(
                    f"index ({i}, {j}) outside {nrows}x{ncols}", lineno=lineno
                )
            value = 1.0 if want == 2 else _parse_value(tokens[2], header.field, lineno)
            if header.symmetry in ("symmetric", "skew-symmetric") and i < j:
                raise MatrixMarketError(
                    f"entry above the diagonal in a {header.symmetry} file",
                    lineno=lineno,
                )
            if header.symmetry == "skew-symmetric" and i == j and value != 0.0:
                raise MatrixMarketError(
                    "nonzero diagonal entry in a skew-symmetric file", lineno=lineno
                )
            rows[k], cols[k], values[k] = i - 1, j - 1, value
    else:
        # array format stores values column-major; symmetric keeps the
        # diagonal plus the strictly lower triangle, skew-symmetric only the
        # strictly lower triangle
        if header.symmetry == "general":
            coords = [(i, j) for j in range(ncols) for i in range(nrows)]
        elif header.symmetry == "symmetric":
            coords = [(i, j) for j in range(ncols) for i in range(j, nrows)]
        else:
            coords = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
        for k, (lineno, line) in enumerate(entries):
            tokens = line.split()
            if len(tokens) != 1:
                raise MatrixMarketError(
                    f"expected 1 value on array line, got {len(tokens)}", lineno=lineno
                )
            i, j = coords[k]
            rows[k], cols[k] = i, j
            values[k] = _parse_value(tokens[0], header.field, lineno)

    return MatrixMarketData(header, nrows, ncols, rows, cols, values)


def mm_write(matrix, path, symmetry: str = "general") -> None:
    """Write a coordinate real Matrix Market file.

    symmetric claims require A.T == A and skew-symmetric claims require
    A.T == -A with a zero diagonal, both exactly; the stored entries are
    then the (strictly, for skew) lower triangle. Values are written with
    17 significant digits so reading back reproduces them bit for bit.
    """
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise ValueError(f"unsupported symmetry claim {symmetry!r}")
    A = matrix if sp.issparse(matrix) else sp.csr_array(np.atleast_2d(np.asarray(matrix, dtype=np.float64)))
    A = sp.csr_array(A)
    nrows, ncols = A.shape
    if symmetry != "general":
        if nrows != ncols:
            raise ValueError(f"{symmetry} claim on a {nrows}x{ncols} matrix")
        defect = (A + A.T) if symmetry == "skew-symmetric" else (A - A.T)
        if defect.nnz and np.any(defect.data != 0.0):
            raise ValueError(f"matrix data is inconsistent with the {symmetry} claim")
        if symmetry == "skew-symmetric" and np.any(A.diagonal() != 0.0):
            raise ValueError("skew-symmetric matrix has a nonzero diagonal entry")
        A = sp.tril(A, k=0 if symmetry == "symmetric" else -1, format="csr")

    coo = sp.coo_array(A)
    coo.eliminate_zeros()
    order = np.lexsort((coo.row, coo.col))
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"%%MatrixMarket matrix coordinate real {symmetry}\n")
        handle.write(f"{nrows} {ncols} {coo.nnz}\n")
        for k in order:
            handle.write(f"{coo.row[k] + 1} {coo.col[k] + 1} {coo.data[k]:.16e}\n")


def trace_export(trace, fmt: str, path) -> None:
    """Write a convergence trace as CSV or JSON with columns k, rho, err, mv.

    Floats carry 17 significant digits; raises ValueError on an empty trace.
    """
    if len(trace) == 0:
        raise ValueError("cannot export an empty trace")
    if fmt == "csv":
        with open(path, "w", encoding="ascii") as handle:
            handle.write("k,rho,err,mv\n")
            for k, rho, err, mv in trace.entries:
                handle.write(f"{k},{rho:.17g},{err:.17g},{mv}\n")
    elif fmt == "json":
        rows = [
            f'{{"k": {k}, "rho": {rho:.17g}, "err": {err:.17g}, "mv": {mv}}}'
            for k, rho, err, mv in trace.entries
        ]
        with open(path, "w", encoding="ascii") as handle:
            handle.write("[\n" + ",\n".join(rows) + "\n]\n")
    else:
        raise ValueError(f"unsupported trace format {fmt!r}")


@dataclass
class StageReport:
    stage: int
    sigma: float
    err: float
    iterations: int
    matvecs: int
    matvecs_raw: int
    converged: bool


@dataclass
class SolveReport:
    """Round-trippable record of one multi-pair solve."""

    matrix: str
    s: int
    stages: list
    total_iterations: int
    total_matvecs: int
    wall_time_s: float
    converged: bool
    config: dict = field(default_factory=dict)

    @classmethod
    def from_result(cls, matrix_id, result, wall_time_s, config) -> "SolveReport":
        stages = [
            StageReport(
                stage=i + 1,
                sigma=p.sigma,
                err=p.err,
                iterations=p.iterations,
                matvecs=p.matvecs,
                matvecs_raw=p.matvecs_raw,
                converged=p.converged,
            )
            for i, p in enumerate(result.pairs)
        ]
        if result.failure is not None:
            f = result.failure
            stages.append(
                StageReport(
                    stage=result.failure_stage,
                    sigma=f.sigma,
                    err=f.err,
                    iterations=f.iterations,
                    matvecs=f.matvecs,
                    matvecs_raw=f.matvecs_raw,
                    converged=False,
                )
            )
        return cls(
            matrix=str(matrix_id),
            s=int(result.requested),
            stages=stages,
            total_iterations=result.total_iterations,
            total_matvecs=result.total_matvecs,
            wall_time_s=float(wall_time_s),
            converged=result.converged,
            config=dict(config),
        )

    def to_json(self) -> str:
        payload = {
            "matrix": self.matrix,
            "s": self.s,
            "stages": [vars(st) for st in self.stages],
            "total_iterations": self.total_iterations,
            "total_matvecs": self.total_matvecs,
            "wall_time_s": self.wall_time_s,
            "converged": self.converged,
            "config": self.config,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        payload = json.loads(text)
        stages = [StageReport(**st) for st in payload.pop("stages")]
        return cls(stages=stages, **payload)

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as handle:
            handle.write(self.to_json() + "\n")


def timed(func, *args, **kwargs):
    """Run func and return (result, elapsed seconds)."""
    start = time.perf_counter()
    result = func(*args, **kwargs)
    return result, time.perf_counter() - start
