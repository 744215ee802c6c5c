"""Shared fixtures and independent reference implementations.

The helpers here are deliberately separate computation paths from the
library: explicit Kronecker assembly, the analytic tridiagonal Toeplitz
spectrum, and complex-arithmetic residuals. Tests compare the library
against these, never the library against itself.
"""

import itertools
import os
from pathlib import Path

import numpy as np
import pytest


def rotation_block(sigma: float) -> np.ndarray:
    """The 2x2 block [[0, sigma], [-sigma, 0]] with eigenvalues +-i*sigma."""
    return np.array([[0.0, sigma], [-sigma, 0.0]])


def random_skew_dense(rng, n: int) -> np.ndarray:
    """Plain Gaussian skew matrix (W - W.T)/2."""
    W = rng.standard_normal((n, n))
    return (W - W.T) / 2.0


def structured_skew(rng, n: int, sigmas) -> np.ndarray:
    """Skew matrix with prescribed sigmas on Haar-random planes.

    Builds S = U diag(sigmas) V.T - V diag(sigmas) U.T from the first 2m
    columns of a random orthogonal matrix; the remaining n - 2m directions
    span the null space.
    """
    sigmas = np.asarray(sigmas, dtype=np.float64)
    m = sigmas.shape[0]
    if 2 * m > n:
        raise ValueError("too many pairs for the dimension")
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    U, V = Q[:, :m], Q[:, m : 2 * m]
    S = (U * sigmas) @ V.T - (V * sigmas) @ U.T
    return (S - S.T) / 2.0


def laddered_sigmas(rng, m: int, s: int) -> np.ndarray:
    """Nonincreasing sigmas whose first s gap ratios stay in [0.75, 0.82].

    The solver's stopping rule leaves an eigenspace angle of roughly
    sqrt(2) * tol * (sigma_1 / sigma_i) / (1 - gamma_i^2) at stage i, so
    ratios much closer to 1 (or sigmas decaying much faster) would push the
    converged planes past the 10 * tol comparison bound by construction,
    not by any defect of the solver.
    """
    sigma = float(rng.uniform(1.0, 10.0))
    values = [sigma]
    for i in range(1, m):
        lo, hi = (0.75, 0.82) if i <= s else (0.3, 0.95)
        sigma *= float(rng.uniform(lo, hi))
        values.append(sigma)
    return np.array(values)


def dense_convection(l: int, zeta) -> np.ndarray:
    """Explicit Kronecker-sum assembly (independent of the operator code)."""
    z1, z2, z3 = zeta
    eye = np.eye(l)

    def toeplitz_block(z):
        T = np.zeros((l, l))
        for i in range(l - 1):
            T[i, i + 1] = z
            T[i + 1, i] = -z
        return T

    return (
        np.kron(eye, np.kron(eye, toeplitz_block(z1)))
        + np.kron(eye, np.kron(toeplitz_block(z2), eye))
        + np.kron(toeplitz_block(z3), np.kron(eye, eye))
    )


def analytic_convection_sigmas(l: int, zeta) -> np.ndarray:
    """Spectrum from the tridiagonal Toeplitz eigenvalue formula.

    The block T_l(z) has eigenvalues 2iz cos(k pi / (l+1)); the Kronecker
    sum adds one eigenvalue from each block, so the sigmas are the absolute
    values of all sums over index triples, halved to one per conjugate pair.
    """
    grid = 2.0 * np.cos(np.arange(1, l + 1) * np.pi / (l + 1))
    vals = [
        abs(zeta[0] * grid[p] + zeta[1] * grid[q] + zeta[2] * grid[r])
        for p, q, r in itertools.product(range(l), repeat=3)
    ]
    vals = np.sort(np.asarray(vals))[::-1]
    return vals[::2]  # one sigma per +- pair


def complex_pair_residual(S: np.ndarray, rho: float, u, v) -> float:
    """|| S x - i rho x || for x = sqrt(2)/2 (u + iv), in complex arithmetic."""
    x = np.sqrt(0.5) * (np.asarray(u) + 1j * np.asarray(v))
    return float(np.linalg.norm(S @ x - 1j * rho * x))


def suitesparse_path(name: str) -> Path:
    base = os.environ.get("SSPEIG_DATA_DIR", Path(__file__).parent / "data")
    return Path(base) / name


def require_suitesparse(name: str) -> Path:
    path = suitesparse_path(name)
    if not path.exists():
        pytest.skip(
            f"SuiteSparse matrix {name} not found at {path}; download it from "
            "the SuiteSparse Matrix Collection (sparse.tamu.edu) to run this test"
        )
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
