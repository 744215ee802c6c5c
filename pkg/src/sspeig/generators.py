"""Constructors for the benchmark skew-symmetric matrices.

Covers the 3-D convection Kronecker-sum family and the two ways of turning
a general sparse matrix into a skew-symmetric operator: the skew part
(A - A.T)/2 of a square matrix, and the block embedding [0, A; -A.T, 0]
whose sigmas are the singular values of A.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .operators import ConvectionOperator, SparseSkewOperator


@dataclass(frozen=True)
class ConvectionSpec:
    """Grid size and convection coefficients (zeta1, zeta2, zeta3)."""

    l: int
    zeta: tuple[float, float, float]

    def __post_init__(self):
        if self.l < 2:
            raise ValueError(f"grid size l must be at least 2, got {self.l}")
        object.__setattr__(self, "zeta", tuple(float(z) for z in self.zeta))
        if len(self.zeta) != 3:
            raise ValueError("zeta must have exactly three components")

    @property
    def dim(self) -> int:
        return self.l**3


def generate_convection(spec: ConvectionSpec) -> ConvectionOperator:
    """Kronecker-sum convection operator of dimension l**3."""
    return ConvectionOperator(spec.l, spec.zeta)


def _to_sparse(A) -> sp.csr_array:
    if sp.issparse(A):
        return sp.csr_array(A)
    return sp.csr_array(np.asarray(A, dtype=np.float64))


def skew_symmetrize(A) -> SparseSkewOperator:
    """Operator realizing (A - A.T)/2 for a square matrix A."""
    A = _to_sparse(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"skew part needs a square matrix, got {A.shape}")
    skew_part = (A - A.T) * 0.5
    return SparseSkewOperator(sp.tril(skew_part, k=-1, format="csr"))


def embed_block(A) -> SparseSkewOperator:
    """Operator realizing [0, A; -A.T, 0] for a p-by-q matrix A.

    The sigmas of the embedding are the singular values of A, so the solver
    run on it computes dominant singular triplets of A.
    """
    A = _to_sparse(A)
    p, q = A.shape
    lower = sp.bmat(
        [
            [sp.csr_array((p, p)), None],
            [-A.T, sp.csr_array((q, q))],
        ],
        format="csr",
    )
    return SparseSkewOperator(sp.csr_array(lower))
