import numpy as np
import pytest
import scipy.sparse as sp

from sspeig.errors import DimensionMismatchError, NotSkewSymmetricError
from sspeig.generators import ConvectionSpec, generate_convection
from sspeig.operators import (
    ConvectionOperator,
    DeflationSet,
    DenseSkewOperator,
    SparseSkewOperator,
    deflate,
    matvec,
    matvec_transpose,
)
from sspeig.oracle import oracle_spectrum
from sspeig.solvers import ssp_solve

from conftest import dense_convection, random_skew_dense, rotation_block


def block_j3_op():
    return SparseSkewOperator.from_matrix(rotation_block(3.0))


class TestMatvec:
    def test_rotation_block(self):
        op = block_j3_op()
        np.testing.assert_array_equal(op.matvec(np.array([0.0, 1.0])), [3.0, 0.0])

    def test_zero_vector(self, rng):
        for op in operator_zoo(rng):
            np.testing.assert_array_equal(op.matvec(np.zeros(op.dim)), 0.0)

    def test_kronecker_matches_explicit_assembly(self):
        op = generate_convection(ConvectionSpec(8, (0.4, 0.5, 0.6)))
        dense = dense_convection(8, (0.4, 0.5, 0.6))
        eye = np.eye(op.dim)
        scale = np.abs(dense).max()
        for j in range(0, op.dim, 37):  # sampled columns, plus see below
            np.testing.assert_allclose(
                op.matvec(eye[:, j]), dense[:, j], atol=1e-13 * scale
            )
        np.testing.assert_allclose(op.to_dense(), dense, atol=1e-13 * scale)

    def test_dimension_mismatch(self):
        op = block_j3_op()
        with pytest.raises(DimensionMismatchError):
            op.matvec(np.ones(3))


class TestMatvecTranspose:
    def test_rotation_block(self):
        op = block_j3_op()
        np.testing.assert_array_equal(
            op.matvec_transpose(np.array([1.0, 0.0])), [0.0, 3.0]
        )

    def test_exact_sign_flip(self, rng):
        for op in operator_zoo(rng):
            x = rng.standard_normal(op.dim)
            total = op.matvec_transpose(x) + op.matvec(x)
            np.testing.assert_array_equal(total, np.zeros(op.dim))

    def test_kronecker_against_dense(self, rng):
        op = generate_convection(ConvectionSpec(8, (0.4, 0.5, 0.6)))
        dense = dense_convection(8, (0.4, 0.5, 0.6))
        x = rng.standard_normal(op.dim)
        expected = -(dense @ x)
        np.testing.assert_allclose(
            op.matvec_transpose(x), expected, rtol=0, atol=1e-13 * np.linalg.norm(expected)
        )


def operator_zoo(rng):
    """One operator of every kind, deflated included."""
    sparse_op = SparseSkewOperator.from_matrix(random_skew_dense(rng, 12))
    dense_op = DenseSkewOperator(random_skew_dense(rng, 9))
    kron_op = ConvectionOperator(3, (0.4, 0.5, 0.6))
    block = np.zeros((6, 6))
    block[:2, :2] = rotation_block(4.0)
    block[2:4, 2:4] = rotation_block(2.0)
    block[4:, 4:] = rotation_block(1.0)
    base = DenseSkewOperator(block)
    ds = DeflationSet.empty(6).appended(
        4.0, np.eye(6)[:, 0], np.eye(6)[:, 1]
    )
    return [sparse_op, dense_op, kron_op, deflate(base, ds)]


class TestSkewSymmetryInvariant:
    def test_bilinear_form_all_kinds(self, rng):
        for op in operator_zoo(rng):
            norm_est = np.linalg.norm(op.to_dense(), 2)
            for _ in range(100):
                x = rng.standard_normal(op.dim)
                y = rng.standard_normal(op.dim)
                defect = abs(x @ op.matvec(y) + y @ op.matvec(x))
                bound = 1e-12 * np.linalg.norm(x) * np.linalg.norm(y) * norm_est
                assert defect <= bound

    def test_matvec_deterministic(self, rng):
        for op in operator_zoo(rng):
            x = rng.standard_normal(op.dim)
            np.testing.assert_array_equal(op.matvec(x), op.matvec(x))


class TestDeflation:
    def test_exact_deflation_annihilates_pair(self):
        S = np.zeros((4, 4))
        S[:2, :2] = rotation_block(3.0)
        S[2:, 2:] = rotation_block(1.0)
        op = DenseSkewOperator(S)
        ds = DeflationSet.empty(4).appended(3.0, np.eye(4)[:, 0], np.eye(4)[:, 1])
        deflated = deflate(op, ds)
        np.testing.assert_allclose(deflated.matvec(np.eye(4)[:, 0]), 0.0, atol=1e-15)
        np.testing.assert_allclose(deflated.matvec(np.eye(4)[:, 1]), 0.0, atol=1e-15)

    def test_exact_deflation_keeps_other_pair(self):
        S = np.zeros((4, 4))
        S[:2, :2] = rotation_block(3.0)
        S[2:, 2:] = rotation_block(1.0)
        op = DenseSkewOperator(S)
        ds = DeflationSet.empty(4).appended(3.0, np.eye(4)[:, 0], np.eye(4)[:, 1])
        deflated = deflate(op, ds)
        np.testing.assert_array_equal(
            deflated.matvec(np.eye(4)[:, 2]), [0.0, 0.0, 0.0, -1.0]
        )

    def test_empty_set_is_bitwise_identity(self, rng):
        op = generate_convection(ConvectionSpec(4, (0.4, 0.5, 0.6)))
        wrapped = deflate(op, DeflationSet.empty(op.dim))
        x = rng.standard_normal(op.dim)
        np.testing.assert_array_equal(wrapped.matvec(x), op.matvec(x))

    def test_deflated_spectrum_drops_to_sigma2(self):
        tol = 1e-8
        op = generate_convection(ConvectionSpec(8, (0.4, 0.5, 0.6)))
        spectrum = oracle_spectrum(op.to_dense())
        pair, _ = ssp_solve(op)
        assert pair.converged
        ds = DeflationSet.empty(op.dim).appended(pair.sigma, pair.u, pair.v)
        deflated_spectrum = oracle_spectrum(deflate(op, ds).to_dense())
        assert abs(deflated_spectrum.sigmas[0] - spectrum.sigmas[1]) <= (
            10 * tol * spectrum.sigmas[0]
        )

    def test_deflated_operator_stays_skew(self, rng):
        S = random_skew_dense(rng, 10)
        spectrum = oracle_spectrum(S)
        ds = DeflationSet.empty(10).appended(
            spectrum.sigmas[0], spectrum.U[:, 0], spectrum.V[:, 0]
        )
        op = deflate(DenseSkewOperator(S), ds)
        norm_est = np.linalg.norm(op.to_dense(), 2)
        for _ in range(100):
            x = rng.standard_normal(10)
            y = rng.standard_normal(10)
            defect = abs(x @ op.matvec(y) + y @ op.matvec(x))
            assert defect <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(y) * norm_est

    def test_dimension_mismatch(self):
        ds = DeflationSet.empty(4).appended(1.0, np.eye(4)[:, 0], np.eye(4)[:, 1])
        with pytest.raises(DimensionMismatchError):
            deflate(block_j3_op(), ds)


class TestDeflationSetValidation:
    def test_rejects_unnormalized_vectors(self):
        with pytest.raises(ValueError, match="unit norm"):
            DeflationSet.empty(4).appended(1.0, 2.0 * np.eye(4)[:, 0], np.eye(4)[:, 1])

    def test_rejects_non_orthogonal_pair(self):
        u = np.eye(4)[:, 0]
        v = np.sqrt([0.5, 0.5, 0.0, 0.0])
        with pytest.raises(ValueError, match="orthogonal"):
            DeflationSet.empty(4).appended(1.0, u, v)

    def test_rejects_increasing_sigmas(self):
        ds = DeflationSet.empty(4).appended(1.0, np.eye(4)[:, 0], np.eye(4)[:, 1])
        with pytest.raises(ValueError, match="nonincreasing"):
            ds.appended(2.0, np.eye(4)[:, 2], np.eye(4)[:, 3])

    def test_allows_tied_sigmas_within_slack(self):
        ds = DeflationSet.empty(4).appended(1.0, np.eye(4)[:, 0], np.eye(4)[:, 1])
        grown = ds.appended(1.0 + 5e-9, np.eye(4)[:, 2], np.eye(4)[:, 3])
        assert grown.count == 2


class TestConstruction:
    def test_rejects_nonzero_diagonal_triplet(self):
        with pytest.raises(NotSkewSymmetricError, match="diagonal"):
            SparseSkewOperator.from_lower_triplets(2, [0], [0], [1.0])

    def test_tolerates_explicit_zero_diagonal(self):
        op = SparseSkewOperator.from_lower_triplets(2, [1, 0], [0, 0], [-3.0, 0.0])
        np.testing.assert_array_equal(op.to_dense(), rotation_block(3.0))

    def test_rejects_upper_triplet(self):
        with pytest.raises(NotSkewSymmetricError, match="above"):
            SparseSkewOperator.from_lower_triplets(2, [0], [1], [3.0])

    def test_rejects_non_skew_matrix(self, rng):
        A = rng.standard_normal((5, 5))
        with pytest.raises(NotSkewSymmetricError):
            SparseSkewOperator.from_matrix(A)
        with pytest.raises(NotSkewSymmetricError):
            DenseSkewOperator(A)

    def test_sparse_roundtrip_through_lower_triangle(self, rng):
        S = random_skew_dense(rng, 20)
        op = SparseSkewOperator.from_matrix(sp.csr_array(S))
        np.testing.assert_allclose(op.to_dense(), S, atol=1e-15)
        assert op.kind == "sparse-triplet"

    def test_functional_forms(self, rng):
        op = block_j3_op()
        x = rng.standard_normal(2)
        np.testing.assert_array_equal(matvec(op, x), op.matvec(x))
        np.testing.assert_array_equal(matvec_transpose(op, x), -op.matvec(x))
