import numpy as np
import pytest

from sspeig.errors import DimensionMismatchError, NotSkewSymmetricError
from sspeig.generators import ConvectionSpec, generate_convection
from sspeig.oracle import eigspace_angle, oracle_spectrum

from conftest import random_skew_dense, rotation_block, structured_skew


class TestOracleSpectrum:
    def test_single_block(self):
        spectrum = oracle_spectrum(rotation_block(3.0))
        np.testing.assert_allclose(spectrum.sigmas, [3.0], rtol=1e-14)
        np.testing.assert_allclose(np.abs(spectrum.U[:, 0]), [1.0, 0.0], atol=1e-14)
        assert spectrum.U[0, 0] > 0  # sign convention: first nonzero positive
        np.testing.assert_allclose(
            rotation_block(3.0) @ spectrum.V[:, 0],
            3.0 * spectrum.U[:, 0],
            atol=1e-13,
        )
        assert spectrum.null_dim == 0

    def test_block_diagonal(self):
        S = np.zeros((4, 4))
        S[:2, :2] = rotation_block(3.0)
        S[2:, 2:] = rotation_block(1.0)
        spectrum = oracle_spectrum(S)
        np.testing.assert_allclose(spectrum.sigmas, [3.0, 1.0], rtol=1e-14)

    def test_convection_rates_match_published_table(self):
        op = generate_convection(ConvectionSpec(8, (0.4, 0.5, 0.6)))
        spectrum = oracle_spectrum(op.to_dense())
        rates = spectrum.sigmas[1:6] / spectrum.sigmas[:5]
        np.testing.assert_allclose(
            np.round(rates, 4), [0.9507, 0.9870, 0.9869, 0.9601, 0.9861]
        )

    def test_reconstruction_on_random_matrices(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 41))
            S = random_skew_dense(rng, n)
            spectrum = oracle_spectrum(S)
            sigma1 = spectrum.sigmas[0]
            recon = (spectrum.U * spectrum.sigmas) @ spectrum.V.T
            recon = recon - (spectrum.V * spectrum.sigmas) @ spectrum.U.T
            assert np.max(np.abs(S - recon)) <= 1e-10 * sigma1

    def test_orthogonality_invariants(self, rng):
        for _ in range(20):
            n = int(rng.integers(4, 41))
            spectrum = oracle_spectrum(random_skew_dense(rng, n))
            m = spectrum.m
            np.testing.assert_allclose(
                spectrum.U.T @ spectrum.U, np.eye(m), atol=1e-10
            )
            np.testing.assert_allclose(
                spectrum.V.T @ spectrum.V, np.eye(m), atol=1e-10
            )
            np.testing.assert_allclose(
                spectrum.U.T @ spectrum.V, np.zeros((m, m)), atol=1e-10
            )

    def test_singular_value_relations(self, rng):
        S = random_skew_dense(rng, 16)
        spectrum = oracle_spectrum(S)
        sigma1 = spectrum.sigmas[0]
        np.testing.assert_allclose(
            S @ spectrum.V, spectrum.U * spectrum.sigmas, atol=1e-10 * sigma1
        )
        np.testing.assert_allclose(
            S.T @ spectrum.U, spectrum.V * spectrum.sigmas, atol=1e-10 * sigma1
        )

    def test_cross_validation_against_general_eigensolver(self, rng):
        for _ in range(20):
            n = int(rng.integers(4, 31))
            S = random_skew_dense(rng, n)
            spectrum = oracle_spectrum(S)
            reference = np.sort(np.abs(np.linalg.eigvals(S).imag))[::-1]
            mine = np.sort(np.repeat(spectrum.sigmas, 2))[::-1]
            if spectrum.null_dim:
                reference = reference[: -spectrum.null_dim]
            np.testing.assert_allclose(
                mine, reference[: 2 * spectrum.m], atol=1e-10 * spectrum.sigmas[0]
            )

    def test_odd_dimension_has_null_space(self, rng):
        for n in (5, 7, 9, 21):
            spectrum = oracle_spectrum(random_skew_dense(rng, n))
            assert spectrum.null_dim >= 1
            assert np.all(spectrum.sigmas > 0)
            assert 2 * spectrum.m + spectrum.null_dim == n

    def test_constructed_null_space(self, rng):
        S = structured_skew(rng, 10, [3.0, 2.0])  # 6-dimensional null space
        spectrum = oracle_spectrum(S)
        assert spectrum.null_dim == 6
        np.testing.assert_allclose(spectrum.sigmas, [3.0, 2.0], rtol=1e-12)

    def test_multiplicity_cluster(self, rng):
        S = np.zeros((6, 6))
        S[:2, :2] = rotation_block(2.0)
        S[2:4, 2:4] = rotation_block(2.0)
        S[4:, 4:] = rotation_block(1.0)
        Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        S = Q @ S @ Q.T
        S = (S - S.T) / 2.0
        spectrum = oracle_spectrum(S)
        np.testing.assert_allclose(spectrum.sigmas, [2.0, 2.0, 1.0], rtol=1e-12)
        basis = spectrum.dominant_space()
        assert basis.shape == (6, 4)
        np.testing.assert_allclose(basis.T @ basis, np.eye(4), atol=1e-10)

    def test_zero_matrix(self):
        spectrum = oracle_spectrum(np.zeros((4, 4)))
        assert spectrum.m == 0
        assert spectrum.null_dim == 4

    def test_rejects_non_skew(self, rng):
        with pytest.raises(NotSkewSymmetricError):
            oracle_spectrum(rng.standard_normal((5, 5)))

    def test_rejects_oversize(self):
        with pytest.raises(DimensionMismatchError):
            oracle_spectrum(np.zeros((8, 8)), max_dim=4)


class TestEigspaceAngle:
    def test_identical_bases(self):
        basis = np.eye(5)[:, :2]
        assert eigspace_angle(basis, basis) == 0.0

    def test_orthogonal_planes(self):
        e = np.eye(4)
        angle = eigspace_angle(e[:, :2], e[:, 2:])
        np.testing.assert_allclose(angle, np.pi / 2, rtol=1e-12)

    def test_shared_direction(self):
        e = np.eye(4)
        angle = eigspace_angle(e[:, :2], np.column_stack([e[:, 0], e[:, 2]]))
        np.testing.assert_allclose(angle, np.pi / 2, rtol=1e-12)

    def test_analytic_quarter_turn(self):
        e = np.eye(4)
        tilted = np.column_stack([(e[:, 0] + e[:, 2]) / np.sqrt(2.0), e[:, 1]])
        angle = eigspace_angle(e[:, :2], tilted)
        np.testing.assert_allclose(angle, np.pi / 4, rtol=1e-12)

    def test_small_angles_resolved(self, rng):
        # rotate one basis vector by a tiny known angle inside a 3rd direction
        theta = 1e-9
        e = np.eye(5)
        tilted = np.column_stack(
            [np.cos(theta) * e[:, 0] + np.sin(theta) * e[:, 2], e[:, 1]]
        )
        angle = eigspace_angle(e[:, :2], tilted)
        np.testing.assert_allclose(angle, theta, rtol=1e-4)

    def test_different_widths(self):
        e = np.eye(6)
        angle = eigspace_angle(e[:, :2], e[:, :4])
        np.testing.assert_allclose(angle, 0.0, atol=1e-12)

    def test_rejects_unnormalized(self):
        basis = np.eye(4)[:, :2]
        with pytest.raises(ValueError, match="orthonormal"):
            eigspace_angle(2.0 * basis, basis)

    def test_rejects_rank_deficient(self):
        degenerate = np.column_stack([np.eye(4)[:, 0], np.eye(4)[:, 0]])
        with pytest.raises(ValueError, match="orthonormal"):
            eigspace_angle(degenerate, np.eye(4)[:, :2])
