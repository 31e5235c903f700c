import numpy as np
import pytest

from gphcrb import linalg
from gphcrb.errors import DimensionMismatch, NotPositiveDefinite

HAND = np.array([[4.0, 2.0], [2.0, 5.0]])  # det 16, chol [[2,0],[1,2]]


class TestCholesky:
    def test_identity(self):
        f = linalg.cholesky(np.eye(2))
        assert np.array_equal(f.lower, np.eye(2))
        assert f.jitter_used == 0.0

    def test_hand_2x2(self):
        f = linalg.cholesky(HAND)
        assert np.allclose(f.lower, [[2.0, 0.0], [1.0, 2.0]], atol=1e-14)
        assert f.jitter_used == 0.0

    def test_rank1_psd_forces_jitter(self):
        a = np.ones((2, 2))
        f = linalg.cholesky(a)
        assert f.jitter_used > 0.0
        recon = f.lower @ f.lower.T
        target = a + f.jitter_used * np.eye(2)
        rel = np.linalg.norm(recon - target) / np.linalg.norm(target)
        assert rel <= 1e-10

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            linalg.cholesky(-np.eye(3))

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatch):
            linalg.cholesky(np.ones((2, 3)))

    def test_reconstruction_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = rng.integers(1, 7)
            b = rng.normal(size=(n, n))
            a = b @ b.T + np.eye(n)
            f = linalg.cholesky(a)
            recon = f.lower @ f.lower.T
            rel = np.linalg.norm(recon - a) / np.linalg.norm(a)
            assert rel <= 1e-10
            assert np.all(np.diag(f.lower) > 0)

    def test_no_jitter_for_well_conditioned(self):
        # jitter_used = 0 whenever min eig exceeds 1e-8 * mean(diag)
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = rng.integers(2, 7)
            b = rng.normal(size=(n, n))
            a = b @ b.T + 0.1 * np.eye(n)
            if np.linalg.eigvalsh(a).min() > 1e-8 * np.mean(np.diag(a)):
                assert linalg.cholesky(a).jitter_used == 0.0


class TestSolve:
    def test_identity(self):
        f = linalg.cholesky(np.eye(3))
        b = np.array([1.0, -2.0, 3.0])
        assert np.array_equal(linalg.solve(f, b), b)

    def test_hand_solve(self):
        f = linalg.cholesky(HAND)
        x = linalg.solve(f, np.array([8.0, 9.0]))
        assert np.allclose(x, [1.375, 1.25], atol=1e-12)

    def test_inverse_via_identity_columns(self):
        f = linalg.cholesky(HAND)
        inv = linalg.solve(f, np.eye(2))
        assert np.allclose(inv, np.array([[5.0, -2.0], [-2.0, 4.0]]) / 16.0, atol=1e-12)

    def test_dimension_mismatch(self):
        f = linalg.cholesky(HAND)
        with pytest.raises(DimensionMismatch):
            linalg.solve(f, np.ones(3))

    def test_random_spd_recovery(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = rng.integers(1, 8)
            b = rng.normal(size=(n, n))
            a = b @ b.T + np.eye(n)
            x = rng.normal(size=n)
            got = linalg.solve(linalg.cholesky(a), a @ x)
            assert np.linalg.norm(got - x) <= 1e-8 * max(1.0, np.linalg.norm(x))


class TestLogdet:
    def test_identity(self):
        assert linalg.logdet(linalg.cholesky(np.eye(4))) == 0.0

    def test_diagonal(self):
        f = linalg.cholesky(np.diag([4.0, 4.0]))
        assert np.isclose(linalg.logdet(f), np.log(16.0), atol=1e-12)

    def test_hand_det16(self):
        assert np.isclose(linalg.logdet(linalg.cholesky(HAND)), np.log(16.0), atol=1e-12)

    def test_eigenvalue_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            b = rng.normal(size=(5, 5))
            a = b @ b.T + np.eye(5)
            oracle = float(np.sum(np.log(np.linalg.eigvalsh(a))))
            got = linalg.logdet(linalg.cholesky(a))
            assert abs(got - oracle) <= 1e-8 * abs(oracle)


class TestSampleMvn:
    def test_vanishing_covariance(self):
        f = linalg.cholesky(np.zeros((3, 3)))
        mean = np.array([1.0, 2.0, 3.0])
        out = linalg.sample_mvn(mean, f, np.random.default_rng(0))
        assert np.max(np.abs(out - mean)) <= 1e-3

    def test_seed_determinism(self):
        f = linalg.cholesky(HAND)
        a = linalg.sample_mvn(np.zeros(2), f, np.random.default_rng(42))
        b = linalg.sample_mvn(np.zeros(2), f, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_dimension_mismatch(self):
        f = linalg.cholesky(HAND)
        with pytest.raises(DimensionMismatch):
            linalg.sample_mvn(np.zeros(3), f, np.random.default_rng(0))

    def test_monte_carlo_covariance(self):
        f = linalg.cholesky(HAND)
        rng = np.random.default_rng(7)
        draws = np.array([linalg.sample_mvn(np.zeros(2), f, rng) for _ in range(10_000)])
        emp = np.cov(draws.T)
        assert np.max(np.abs(emp - HAND) / np.abs(HAND)) <= 0.05
