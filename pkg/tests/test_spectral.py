import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prefrank.graph import gen_complete
from prefrank.spectral import (
    NotSymmetricError,
    eig_sym,
    is_psd,
    lambda_max,
    lambda_min,
    pseudo_inverse,
)


def jacobi_eigenvalues(M, sweeps=100, tol=1e-14):
    """Cyclic Jacobi rotations; slow but independent of LAPACK."""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                if theta == 0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1))
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))[::-1]


symmetric = st.integers(1, 7).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-5, 5, allow_nan=False)).map(lambda a: a + a.T)
)


class TestEigSym:
    def test_identity(self):
        assert np.allclose(eig_sym(np.eye(3)).eigenvalues, [1, 1, 1])

    def test_triangle(self):
        w = eig_sym(gen_complete(3).adjacency).eigenvalues
        assert np.allclose(w, [2, -1, -1], atol=1e-12)

    def test_diagonal(self):
        e = eig_sym(np.diag([5.0, 2.0, -1.0]))
        assert np.allclose(e.eigenvalues, [5, 2, -1])
        assert np.allclose(np.abs(e.eigenvectors), np.eye(3))

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetricError):
            eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(NotSymmetricError):
            eig_sym(np.zeros((2, 3)))

    @given(symmetric)
    def test_matches_jacobi_oracle(self, M):
        w = eig_sym(M).eigenvalues
        assert np.allclose(w, jacobi_eigenvalues(M), atol=1e-8 * max(1.0, np.abs(M).max()))

    @given(symmetric)
    def test_orthonormal_and_reconstructs(self, M):
        e = eig_sym(M)
        q = e.eigenvectors
        assert np.allclose(q.T @ q, np.eye(M.shape[0]), atol=1e-10)
        assert np.allclose(e.reconstruct(), M, atol=1e-9 * max(1.0, np.abs(M).max()))
        assert np.all(np.diff(e.eigenvalues) <= 1e-12)

    @given(symmetric)
    def test_extreme_eigenvalues(self, M):
        w = eig_sym(M).eigenvalues
        assert lambda_max(M) == pytest.approx(w[0], abs=1e-9)
        assert lambda_min(M) == pytest.approx(w[-1], abs=1e-9)


class TestPseudoInverse:
    def test_identity(self):
        assert np.allclose(pseudo_inverse(np.eye(4)), np.eye(4))

    def test_k2_laplacian(self):
        L = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert np.allclose(pseudo_inverse(L), L / 4)

    def test_zero(self):
        assert np.array_equal(pseudo_inverse(np.zeros((3, 3))), np.zeros((3, 3)))

    @given(symmetric)
    def test_moore_penrose_conditions(self, M):
        P = pseudo_inverse(M)
        scale = max(1.0, np.abs(M).max())
        w = np.abs(eig_sym(M).eigenvalues)
        kept = w[w > 1e-10 * max(w.max(), 1e-300)]
        if kept.size and kept.min() < 1e-6 * scale:
            return  # ill-conditioned draw; the identities lose meaning in floating point
        assert np.allclose(M @ P @ M, M, atol=1e-7 * scale)
        assert np.allclose(P @ M @ P, P, atol=1e-7 * max(1.0, np.abs(P).max()))
        assert np.allclose(P, P.T)


class TestIsPsd:
    def test_identity(self):
        assert is_psd(np.eye(3))

    def test_swap(self):
        assert not is_psd(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_ones(self):
        assert is_psd(np.ones((3, 3)))

    @given(st.integers(1, 6), st.integers(0, 10_000))
    def test_gram_is_psd(self, n, seed):
        B = np.random.default_rng(seed).normal(size=(n, 2))
        assert is_psd(B @ B.T)
