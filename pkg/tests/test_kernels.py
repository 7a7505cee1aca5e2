import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graph
from prefrank.graph import Graph, PairIndex, gen_complete
from prefrank.kernels import (
    KernelError,
    KernelKind,
    NodeKernel,
    PairKernel,
    PairMode,
    full_kronecker,
    incidence_difference,
    kernel_is_psd,
    laplacian_kernel,
    ls_kernel,
    ls_tau,
    pair_kernel,
    rkhs_norm,
    validate_membership,
)
from prefrank.spectral import eig_sym, pseudo_inverse

graphs = st.builds(
    lambda n, seed: random_graph(np.random.default_rng(seed), n),
    st.integers(1, 12),
    st.integers(0, 100_000),
)


class TestLaplacian:
    def test_k2(self):
        k = laplacian_kernel(Graph.from_edges(2, [(0, 1)]))
        assert np.allclose(k.matrix, np.array([[1, -1], [-1, 1]]) / 4)
        assert k.kind is KernelKind.LAPLACIAN

    def test_empty_graph_gives_zero(self):
        assert np.array_equal(laplacian_kernel(Graph(np.zeros((4, 4)))).matrix, np.zeros((4, 4)))

    def test_k3_spectrum(self):
        w = eig_sym(laplacian_kernel(gen_complete(3)).matrix).eigenvalues
        assert np.allclose(w, [1 / 3, 1 / 3, 0], atol=1e-12)

    def test_normalized_rejects_isolated(self):
        with pytest.raises(KernelError):
            laplacian_kernel(Graph.from_edges(3, [(0, 1)]), normalized=True)

    def test_normalized_complete(self):
        # I - J/(n-1) + I/(n-1) has spectrum n/(n-1) (mult n-1) and 0
        n = 5
        w = eig_sym(laplacian_kernel(gen_complete(n), normalized=True).matrix).eigenvalues
        assert np.allclose(w[:-1], (n - 1) / n) and abs(w[-1]) < 1e-12

    @given(graphs)
    def test_psd(self, g):
        assert kernel_is_psd(laplacian_kernel(g))


class TestLS:
    def test_empty_graph_identity(self):
        g = Graph(np.zeros((3, 3)))
        assert ls_tau(g) == 1.0
        assert np.array_equal(ls_kernel(g).matrix, np.eye(3))

    def test_triangle_all_ones(self):
        assert np.allclose(ls_kernel(gen_complete(3)).matrix, np.ones((3, 3)), atol=1e-10)

    def test_single_edge(self):
        assert np.allclose(ls_kernel(Graph.from_edges(2, [(0, 1)])).matrix, np.ones((2, 2)))

    @given(graphs)
    def test_membership(self, g):
        report = validate_membership(ls_kernel(g), g)
        assert report.ok, report.violations


class TestMembership:
    def test_laplacian_fails_diagonal(self):
        report = validate_membership(laplacian_kernel(gen_complete(3)), gen_complete(3))
        assert not report.ok
        assert len(report.diagonal) == 3
        assert report.diagonal[0][1] == pytest.approx(2 / 9)

    def test_identity_on_complete(self):
        assert validate_membership(NodeKernel(np.eye(4)), gen_complete(4)).ok

    def test_off_edge_and_psd(self):
        g = Graph(np.zeros((2, 2)))
        report = validate_membership(np.array([[1.0, 2.0], [2.0, 1.0]]), g)
        assert report.off_edge and not report.psd
        assert len(report.violations) == 2

    def test_shape_mismatch(self):
        with pytest.raises(KernelError):
            validate_membership(np.eye(2), gen_complete(3))


class TestRkhsNorm:
    def test_zero(self):
        assert rkhs_norm(np.zeros(3), NodeKernel(np.eye(3))) == 0.0

    def test_identity(self):
        f = np.array([1.0, -2.0, 3.0])
        assert rkhs_norm(f, NodeKernel(np.eye(3))) == pytest.approx(14.0)

    def test_all_ones_kernel(self):
        # J3 has eigenvalue 3 on the constant vector, so J3^+ = J3 / 9 and 1^T J3 1 / 9 = 1
        assert rkhs_norm(np.ones(3), NodeKernel(np.ones((3, 3)))) == pytest.approx(1.0)
        assert np.allclose(pseudo_inverse(np.ones((3, 3))), np.ones((3, 3)) / 9)


class TestPairKernel:
    def test_identity_kronecker_single_pair(self):
        pk = pair_kernel(NodeKernel(np.eye(2)), PairMode.KRONECKER)
        assert pk.N == 1 and pk.entry(0, 0) == 1.0

    def test_identity_pd(self):
        pk = pair_kernel(NodeKernel(np.eye(3)), PairMode.PAIRWISE_DIFFERENCE)
        p = PairIndex(3)
        assert np.allclose(pk.diagonal(), 2.0)
        assert pk.entry(p.index(0, 1), p.index(0, 2)) == 1.0
        assert pk.entry(p.index(0, 1), p.index(1, 2)) == -1.0

    def test_complete_ls_kronecker_all_ones(self):
        pk = pair_kernel(ls_kernel(gen_complete(3)), PairMode.KRONECKER)
        assert np.allclose(pk.materialize(), 1.0)

    @given(graphs, st.sampled_from(list(PairMode)))
    def test_block_matches_definition(self, g, mode):
        K = ls_kernel(g).matrix
        pk = PairKernel(ls_kernel(g), mode)
        if pk.N == 0:
            return
        p = pk.pairs
        M = pk.materialize()
        for k in range(min(pk.N, 6)):
            for l in range(min(pk.N, 6)):
                i, j = p.pair(k)
                a, b = p.pair(l)
                if mode is PairMode.KRONECKER:
                    want = K[i, a] * K[j, b]
                else:
                    want = K[i, a] - K[i, b] - K[j, a] + K[j, b]
                assert M[k, l] == pytest.approx(want)
        assert np.allclose(np.diag(M), pk.diagonal())

    @given(graphs, st.sampled_from(list(PairMode)), st.integers(0, 1000))
    def test_matvec_matches_dense(self, g, mode, seed):
        pk = PairKernel(laplacian_kernel(g), mode)
        if pk.N == 0:
            return
        rng = np.random.default_rng(seed)
        beta = np.where(rng.random(pk.N) < 0.4, rng.normal(size=pk.N), 0.0)
        assert np.allclose(pk.matvec(beta), pk.materialize() @ beta, atol=1e-10)
        support = np.flatnonzero(beta)
        assert np.allclose(pk.matvec(beta[support], support=support), pk.materialize() @ beta, atol=1e-10)

    def test_pd_equals_incidence_form(self):
        g = random_graph(np.random.default_rng(0), 6)
        K = ls_kernel(g)
        E = incidence_difference(6)
        assert np.allclose(PairKernel(K, "PairwiseDifference").materialize(), E.T @ K.matrix @ E)

    def test_kronecker_is_restriction_of_full_product(self):
        K = ls_kernel(random_graph(np.random.default_rng(1), 5))
        full = full_kronecker(K)
        p = PairIndex(5)
        ordered = p.first * 5 + p.second
        assert np.allclose(PairKernel(K, "Kronecker").materialize(), full[np.ix_(ordered, ordered)])

    def test_refuses_large_materialize(self):
        pk = PairKernel(NodeKernel(np.eye(PairKernel.MATERIALIZE_MAX_N + 1)), "Kronecker")
        with pytest.raises(KernelError):
            pk.materialize()

    def test_kernel_is_read_only(self):
        k = NodeKernel(np.eye(2))
        with pytest.raises(ValueError):
            k.matrix[0, 0] = 2.0
