"""Matrix-free real skew-symmetric linear operators.

Every concrete operator guarantees the implied matrix satisfies S^T = -S
exactly: storage keeps one triangle (or an equivalent structural form) and
the opposite triangle is synthesized with flipped sign, never stored as an
independent copy that could drift.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, NotSkewSymmetricError

_EPS = np.finfo(np.float64).eps


def _as_vector(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise DimensionMismatchError(
            f"expected a real vector of length {n}, got shape {x.shape}"
        )
    return x


class SkewOperator:
    """Abstract real skew-symmetric operator supplying y = S @ x."""

    kind = "abstract"

    def __init__(self, dim: int):
        dim = int(dim)
        if dim < 1:
            raise ValueError(f"operator dimension must be positive, got {dim}")
        self.dim = dim

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def matvec(self, x) -> np.ndarray:
        """Compute S @ x."""
        raise NotImplementedError

    def matvec_transpose(self, x) -> np.ndarray:
        """Compute S.T @ x, which equals -(S @ x) exactly (same code path)."""
        return -self.matvec(x)

    def to_dense(self) -> np.ndarray:
        """Assemble the implied matrix column by column. Small dims only."""
        n = self.dim
        out = np.empty((n, n))
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            out[:, j] = self.matvec(e)
            e[j] = 0.0
        return out

    def __matmul__(self, x):
        return self.matvec(x)


class SparseSkewOperator(SkewOperator):
    """CSR-backed operator storing only the strictly lower triangle.

    matvec computes L @ x - L.T @ x where L holds the strictly lower
    entries of S; the transpose term reuses the same stored data, so exact
    skew-symmetry is a construction invariant rather than a data invariant.
    """

    kind = "sparse-triplet"

    def __init__(self, lower):
        lower = sp.csr_array(lower)
        if lower.shape[0] != lower.shape[1]:
            raise DimensionMismatchError(
                f"lower-triangle payload must be square, got {lower.shape}"
            )
        lower = lower.copy()
        lower.eliminate_zeros()
        if sp.triu(lower, k=0).count_nonzero() > 0:
            raise NotSkewSymmetricError(
                "payload must contain strictly lower-triangle entries only"
            )
        super().__init__(lower.shape[0])
        self._lower = lower

    @classmethod
    def from_lower_triplets(cls, n, rows, cols, values) -> "SparseSkewOperator":
        """Build from 0-based triplets of the strictly lower triangle.

        Diagonal entries with value exactly zero are tolerated and dropped;
        nonzero diagonal entries are rejected (a skew-symmetric matrix has a
        zero diagonal). Entries above the diagonal are rejected as format
        misuse. Duplicate positions are summed.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape):
            raise DimensionMismatchError("triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise DimensionMismatchError("triplet index out of range")
        on_diag = rows == cols
        if np.any(values[on_diag] != 0.0):
            raise NotSkewSymmetricError(
                "nonzero diagonal entry in skew-symmetric data"
            )
        if np.any(rows < cols):
            raise NotSkewSymmetricError(
                "entry above the diagonal in lower-triangle skew-symmetric data"
            )
        keep = ~on_diag
        lower = sp.coo_array(
            (values[keep], (rows[keep], cols[keep])), shape=(n, n)
        ).tocsr()
        return cls(lower)

    @classmethod
    def from_matrix(cls, A, rtol: float = 1e-12) -> "SparseSkewOperator":
        """Build from a full square matrix that is skew within ``rtol``.

        The realized operator uses only the strictly lower triangle of A, so
        it is exactly skew even when A carries rounding-level asymmetry.
        """
        A = sp.csr_array(A)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(f"matrix must be square, got {A.shape}")
        scale = np.max(np.abs(A.data)) if A.nnz else 0.0
        defect = A + A.T
        worst = np.max(np.abs(defect.data)) if defect.nnz else 0.0
        if worst > rtol * scale:
            raise NotSkewSymmetricError(
                f"matrix is not skew-symmetric: max|A + A.T| = {worst:.3e} "
                f"exceeds {rtol:g} * max|A| = {rtol * scale:.3e}"
            )
        return cls(sp.tril(A, k=-1, format="csr"))

    @property
    def nnz(self) -> int:
        """Stored nonzeros of the full implied matrix (both triangles)."""
        return 2 * self._lower.nnz

    def matvec(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        return self._lower @ x - self._lower.T @ x

    def to_dense(self) -> np.ndarray:
        lower = self._lower.toarray()
        return lower - lower.T


class DenseSkewOperator(SkewOperator):
    """Dense operator for desk-size matrices.

    The stored matrix is (S - S.T)/2, which is exactly antisymmetric
    elementwise in IEEE arithmetic, so the construction invariant holds even
    when the input carries rounding-level asymmetry.
    """

    kind = "dense"

    def __init__(self, S, rtol: float = 1e-12):
        S = np.asarray(S, dtype=np.float64)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionMismatchError(f"matrix must be square, got {S.shape}")
        scale = np.max(np.abs(S)) if S.size else 0.0
        worst = np.max(np.abs(S + S.T)) if S.size else 0.0
        if worst > rtol * scale:
            raise NotSkewSymmetricError(
                f"matrix is not skew-symmetric: max|S + S.T| = {worst:.3e} "
                f"exceeds {rtol:g} * max|S| = {rtol * scale:.3e}"
            )
        super().__init__(S.shape[0])
        self._matrix = (S - S.T) / 2.0

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self._matrix))

    def matvec(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        return self._matrix @ x

    def to_dense(self) -> np.ndarray:
        return self._matrix.copy()


class ConvectionOperator(SkewOperator):
    """Kronecker-sum convection operator on the unit cube, never assembled.

    Realizes I (x) I (x) T(z1) + I (x) T(z2) (x) I + T(z3) (x) I (x) I where
    T(z) is the l-by-l tridiagonal Toeplitz block with +z on the
    superdiagonal and -z on the subdiagonal. The action is computed by three
    strided sweeps over the iterate viewed as an (l, l, l) array, keeping
    memory at O(n). The z1 block couples the fastest-varying (innermost)
    index.
    """

    kind = "kronecker-convection"

    def __init__(self, l: int, zeta):
        l = int(l)
        if l < 2:
            raise ValueError(f"grid size l must be at least 2, got {l}")
        zeta = tuple(float(z) for z in zeta)
        if len(zeta) != 3:
            raise ValueError("zeta must have exactly three components")
        super().__init__(l**3)
        self.l = l
        self.zeta = zeta
        self._nnz = sum(2 * (l - 1) * l * l for z in zeta if z != 0.0)

    @property
    def nnz(self) -> int:
        return self._nnz

    def matvec(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        l = self.l
        cube = x.reshape(l, l, l)
        out = np.zeros_like(cube)
        # zeta[0] acts along the innermost axis, zeta[2] along the outermost.
        for axis, z in ((2, self.zeta[0]), (1, self.zeta[1]), (0, self.zeta[2])):
            if z == 0.0:
                continue
            src = np.moveaxis(cube, axis, 0)
            dst = np.moveaxis(out, axis, 0)
            dst[:-1] += z * src[1:]
            dst[1:] -= z * src[:-1]
        return out.reshape(-1)


class DeflationSet:
    """Accumulated converged triples (sigma_j, u_j, v_j) for rank-2i deflation.

    Immutable; grow with :meth:`appended`. Validation enforces unit vectors
    within 1e-12, per-pair orthogonality |u_j.T v_j| <= 10*tol (converged
    iterates are orthogonal up to residual-level error), and nonincreasing
    sigmas up to the same converged-tolerance slack so that tied eigenvalues
    across a deflation boundary are accepted.
    """

    __slots__ = ("sigmas", "us", "vs", "tol")

    def __init__(self, sigmas, us, vs, tol: float = 1e-8):
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=np.float64))
        us = np.asarray(us, dtype=np.float64)
        vs = np.asarray(vs, dtype=np.float64)
        if us.ndim != 2 or vs.ndim != 2:
            raise DimensionMismatchError("us and vs must be n-by-i matrices")
        count = sigmas.shape[0]
        if us.shape[1] != count or vs.shape[1] != count or us.shape[0] != vs.shape[0]:
            raise DimensionMismatchError(
                f"inconsistent deflation shapes: sigmas {sigmas.shape}, "
                f"us {us.shape}, vs {vs.shape}"
            )
        if count:
            if np.any(sigmas <= 0.0):
                raise ValueError("deflated sigmas must be positive")
            slack = 1.0 + 10.0 * tol
            if np.any(sigmas[1:] > sigmas[:-1] * slack):
                raise ValueError("deflated sigmas must be nonincreasing")
            norms_u = np.linalg.norm(us, axis=0)
            norms_v = np.linalg.norm(vs, axis=0)
            if np.max(np.abs(norms_u - 1.0)) > 1e-12 or np.max(np.abs(norms_v - 1.0)) > 1e-12:
                raise ValueError("deflation vectors must have unit norm within 1e-12")
            cross = np.abs(np.einsum("ij,ij->j", us, vs))
            if np.max(cross) > 10.0 * tol:
                raise ValueError(
                    f"deflation pair not orthogonal: max|u.T v| = {np.max(cross):.3e} "
                    f"exceeds 10*tol = {10.0 * tol:.3e}"
                )
        self.sigmas = sigmas
        self.us = us
        self.vs = vs
        self.tol = float(tol)

    @classmethod
    def empty(cls, n: int, tol: float = 1e-8) -> "DeflationSet":
        return cls(np.empty(0), np.empty((n, 0)), np.empty((n, 0)), tol=tol)

    @property
    def count(self) -> int:
        return int(self.sigmas.shape[0])

    @property
    def dim(self) -> int:
        return int(self.us.shape[0])

    def appended(self, sigma: float, u, v) -> "DeflationSet":
        """Return a new set with one more converged triple."""
        u = np.asarray(u, dtype=np.float64).reshape(-1, 1)
        v = np.asarray(v, dtype=np.float64).reshape(-1, 1)
        return DeflationSet(
            np.append(self.sigmas, float(sigma)),
            np.hstack([self.us, u]),
            np.hstack([self.vs, v]),
            tol=self.tol,
        )

    def correction(self, x: np.ndarray) -> np.ndarray:
        """Rank-2i term sum_j sigma_j ((v_j.T x) u_j - (u_j.T x) v_j)."""
        if self.count == 0:
            return np.zeros_like(x)
        return self.us @ (self.sigmas * (self.vs.T @ x)) - self.vs @ (
            self.sigmas * (self.us.T @ x)
        )


class DeflatedOperator(SkewOperator):
    """Base operator with converged pairs subtracted, never formed explicitly.

    matvec computes S x - sum_j sigma_j ((v_j.T x) u_j - (u_j.T x) v_j);
    with an empty deflation set results are bitwise equal to the base.
    """

    kind = "deflated"

    def __init__(self, base: SkewOperator, deflation: DeflationSet):
        if deflation.count and deflation.dim != base.dim:
            raise DimensionMismatchError(
                f"deflation vectors have length {deflation.dim}, "
                f"operator dimension is {base.dim}"
            )
        super().__init__(base.dim)
        self.base = base
        self.deflation = deflation

    def matvec(self, x) -> np.ndarray:
        y = self.base.matvec(x)
        if self.deflation.count == 0:
            return y
        x = _as_vector(x, self.dim)
        return y - self.deflation.correction(x)

    def to_dense(self) -> np.ndarray:
        dense = self.base.to_dense()
        ds = self.deflation
        if ds.count:
            dense = dense - (ds.us * ds.sigmas) @ ds.vs.T + (ds.vs * ds.sigmas) @ ds.us.T
        return dense


def matvec(op: SkewOperator, x) -> np.ndarray:
    """Functional form of op.matvec."""
    return op.matvec(x)


def matvec_transpose(op: SkewOperator, x) -> np.ndarray:
    """Functional form of op.matvec_transpose."""
    return op.matvec_transpose(x)


def deflate(op: SkewOperator, deflation: DeflationSet) -> DeflatedOperator:
    """Wrap ``op`` so converged pairs are removed from its action."""
    return DeflatedOperator(op, deflation)
