"""Dense brute-force structured spectral decomposition of skew matrices.

Ground truth for tests and verification. The decomposition routes through
the symmetric positive semidefinite matrix S.T @ S: each positive sigma is
the square root of a (multiplicity >= 2) eigenvalue, u is a unit
eigenvector, and v = S.T u / sigma completes the pair. Any orthonormal
basis of an eigenplane yields valid real/imaginary eigenvector parts, which
is what makes the cluster re-orthogonalization below legitimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatchError, NotSkewSymmetricError, OracleError

_EPS = np.finfo(np.float64).eps


@dataclass
class StructuredSpectrum:
    """Structured decomposition S = U Sigma V.T - V Sigma U.T.

    Attributes
    ----------
    sigmas : (m,) ndarray
        Positive values sigma_1 >= ... >= sigma_m; the eigenvalues of S are
        +-i*sigma_j plus ``null_dim`` zeros.
    U, V : (n, m) ndarrays
        Orthonormal and mutually orthogonal columns with
        S @ V[:, j] = sigmas[j] * U[:, j].
    null_dim : int
        Dimension of the null space (0 for nonsingular even-n input).
    """

    sigmas: np.ndarray
    U: np.ndarray
    V: np.ndarray
    null_dim: int

    @property
    def m(self) -> int:
        return int(self.sigmas.shape[0])

    def plane(self, j: int) -> np.ndarray:
        """Orthonormal basis (n, 2) of the j-th conjugate eigenplane."""
        return np.column_stack([self.U[:, j], self.V[:, j]])

    def dominant_space(self, rtol: float = 1e-8) -> np.ndarray:
        """Basis of the eigenspace of all sigmas within rtol of sigma_1."""
        take = self.sigmas >= self.sigmas[0] * (1.0 - rtol)
        return np.hstack([np.column_stack([self.U[:, j], self.V[:, j]])
                          for j in range(self.m) if take[j]])


def _sign_fix(u: np.ndarray) -> np.ndarray:
    nz = np.nonzero(u)[0]
    if nz.size and u[nz[0]] < 0.0:
        return -u
    return u


def oracle_spectrum(S, max_dim: int = 5000, rtol: float = 1e-12,
                    cluster_rtol: float = 1e-8) -> StructuredSpectrum:
    """Full structured decomposition of a dense skew-symmetric matrix.

    Parameters
    ----------
    S : (n, n) array_like
        Real skew-symmetric matrix, n <= max_dim, with
        max|S + S.T| <= rtol * max|S|.
    cluster_rtol : float
        Sigmas closer than cluster_rtol * sigma_1 are treated as one
        multiplicity cluster and re-orthogonalized jointly.

    Raises
    ------
    NotSkewSymmetricError
        If the input fails the skew-symmetry precondition.
    OracleError
        If cluster re-orthogonalization degenerates.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {S.shape}")
    n = S.shape[0]
    if n > max_dim:
        raise DimensionMismatchError(
            f"dense oracle limited to n <= {max_dim}, got {n}"
        )
    scale = np.max(np.abs(S)) if S.size else 0.0
    worst = np.max(np.abs(S + S.T)) if S.size else 0.0
    if worst > rtol * scale:
        raise NotSkewSymmetricError(
            f"max|S + S.T| = {worst:.3e} exceeds {rtol:g} * max|S| = {rtol * scale:.3e}"
        )
    W = (S - S.T) / 2.0  # exactly antisymmetric
    gram = sla.blas.dsyrk(1.0, W, trans=1)  # upper triangle of W.T W
    gram = gram + np.triu(gram, k=1).T
    evals, Q = sla.eigh(gram, driver="evd", overwrite_a=True)
    order = np.argsort(-evals, kind="stable")  # keep tied eigenvectors in order
    Q = Q[:, order]
    sig_all = np.sqrt(np.clip(evals[order], 0.0, None))
    sigma1 = sig_all[0] if n else 0.0

    if sigma1 == 0.0:
        return StructuredSpectrum(np.empty(0), np.empty((n, 0)), np.empty((n, 0)), n)

    # sqrt(eigenvalue of S.T S) floors computed null sigmas at sqrt(eps)*sigma1;
    # re-measuring small candidates as ||S q|| avoids the squaring and resolves
    # the null space down to rounding level
    small = sig_all < 1e-4 * sigma1
    if np.any(small):
        sig_all[small] = np.linalg.norm(W @ Q[:, small], axis=0)
        order = np.argsort(-sig_all, kind="stable")
        sig_all = sig_all[order]
        Q = Q[:, order]
        sigma1 = sig_all[0]

    null_floor = n * _EPS * sigma1
    keep = int(np.searchsorted(-sig_all, -null_floor))  # sig_all descending
    null_dim = n - keep
    if keep % 2 == 1:
        # a genuine pair straddling the null threshold: push the borderline
        # value into the null space rather than leave it unpaired
        if sig_all[keep - 1] <= 10.0 * null_floor:
            keep -= 1
            null_dim += 1
        else:
            raise OracleError(
                f"unpaired singular value {sig_all[keep - 1]:.6e} above the "
                f"null threshold {null_floor:.6e}"
            )

    sig = sig_all[:keep]
    basis = Q[:, :keep]

    # split into multiplicity clusters by relative gap
    boundaries = [0]
    for idx in range(1, keep):
        if sig[idx - 1] - sig[idx] > cluster_rtol * sigma1:
            boundaries.append(idx)
    boundaries.append(keep)

    m = keep // 2
    sig_out = np.empty(m)
    U = np.empty((n, m))
    V = np.empty((n, m))
    simple: list[int] = []  # output slots of width-2 clusters, filled in batch
    pair = 0
    for start, stop in zip(boundaries[:-1], boundaries[1:]):
        width = stop - start
        if width % 2 == 1:
            raise OracleError(
                f"odd-sized sigma cluster of width {width} near "
                f"sigma = {sig[start]:.6e}; cannot pair eigenvectors"
            )
        if width == 2:
            sig_out[pair] = sig[start]
            U[:, pair] = _sign_fix(basis[:, start])
            simple.append(pair)
            pair += 1
            continue
        # genuine multiplicity: interleave u picks with S applications so the
        # extracted pairs stay jointly orthonormal inside the cluster
        block = basis[:, start:stop]
        taken = np.empty((n, 0))
        for t in range(width // 2):
            sigma_t = sig[start + 2 * t]
            resid = block - taken @ (taken.T @ block)
            col = int(np.argmax(np.linalg.norm(resid, axis=0)))
            u = resid[:, col]
            u = u - taken @ (taken.T @ u)  # second pass for orthogonality
            norm_u = np.linalg.norm(u)
            if norm_u < 0.5:
                raise OracleError(
                    f"cluster re-orthogonalization failed near sigma = {sigma_t:.6e}"
                )
            u = _sign_fix(u / norm_u)
            v = -(W @ u) / sigma_t  # S.T u / sigma
            v = v - taken @ (taken.T @ v)
            v = v - u * (u @ v)
            norm_v = np.linalg.norm(v)
            if abs(norm_v - 1.0) > 0.1:
                raise OracleError(
                    f"cluster re-orthogonalization failed near sigma = {sigma_t:.6e}"
                )
            v = v / norm_v
            taken = np.column_stack([taken, u, v])
            sig_out[pair] = sigma_t
            U[:, pair] = u
            V[:, pair] = v
            pair += 1

    if simple:
        cols = np.array(simple)
        V[:, cols] = -(W @ U[:, cols]) / sig_out[cols]
        # one orthogonalization pass against the own u; cross-cluster terms
        # are already at eigensolver accuracy
        V[:, cols] -= U[:, cols] * np.einsum("ij,ij->j", U[:, cols], V[:, cols])
        norms = np.linalg.norm(V[:, cols], axis=0)
        if np.max(np.abs(norms - 1.0)) > 0.1:
            worst = cols[int(np.argmax(np.abs(norms - 1.0)))]
            raise OracleError(
                f"re-orthogonalization failed near sigma = {sig_out[worst]:.6e}"
            )
        V[:, cols] /= norms

    return StructuredSpectrum(sig_out, U, V, null_dim)


def eigspace_angle(basis1, basis2, ortho_tol: float = 1e-10) -> float:
    """Largest principal angle between the column spaces of two bases.

    Both inputs must have orthonormal columns within ``ortho_tol``; the
    column counts may differ (e.g. a converged plane against a
    higher-dimensional eigenspace).
    """
    angles = []
    for name, basis in (("basis1", basis1), ("basis2", basis2)):
        basis = np.asarray(basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[1] < 1:
            raise DimensionMismatchError(f"{name} must be a 2-D n-by-k basis")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(basis.shape[1]))) > ortho_tol:
            raise ValueError(
                f"{name} is not orthonormal within {ortho_tol:g} "
                "(rank-deficient or unnormalized input)"
            )
        angles.append(basis)
    if angles[0].shape[0] != angles[1].shape[0]:
        raise DimensionMismatchError("bases must share the ambient dimension")
    return float(np.max(sla.subspace_angles(angles[0], angles[1])))
