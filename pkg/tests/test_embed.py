import numpy as np
import pytest

from specmix.embed import (
    make_embedding,
    normalized_matvec,
    scale_eigenvectors,
    spectral_embedding,
)
from specmix.linalg import jacobi_eigh
from specmix.model import SparseGraph, construct_latent_support, sample_graph
from specmix.rng import stream

from test_model import reference_params


def dense_normalized(graph: SparseGraph, d: float) -> np.ndarray:
    return graph.to_dense() - (d / graph.n) * np.ones((graph.n, graph.n))


class TestNormalizedMatvec:
    def test_empty_graph_ones(self):
        g = SparseGraph.from_edges(4, [], [])
        out = normalized_matvec(g, 2.0, np.ones(4))
        assert np.allclose(out, -2.0 * np.ones(4), atol=1e-15)

    def test_single_edge_pure_adjacency(self):
        g = SparseGraph.from_edges(3, [0], [1])
        out = normalized_matvec(g, 0.0, np.array([1.0, 2.0, 3.0]))
        assert np.array_equal(out, [2.0, 1.0, 0.0])

    def test_matches_dense_oracle(self, rng):
        g = SparseGraph.from_edges(
            50, rng.integers(0, 50, 200), rng.integers(0, 50, 200)
        )
        x = rng.standard_normal(50)
        want = dense_normalized(g, 7.0) @ x
        assert np.abs(normalized_matvec(g, 7.0, x) - want).max() < 1e-12

    def test_length_check(self):
        g = SparseGraph.from_edges(3, [0], [1])
        with pytest.raises(ValueError):
            normalized_matvec(g, 1.0, np.ones(4))


class TestSpectralEmbedding:
    def test_two_cliques_sign_split(self):
        edges = [(i, j) for i in range(10) for j in range(i + 1, 10)]
        edges += [(10 + i, 10 + j) for i in range(10) for j in range(i + 1, 10)]
        u, v = zip(*edges)
        g = SparseGraph.from_edges(20, u, v)
        d = 2.0 * g.edge_count / g.n
        lam, vecs = spectral_embedding(g, d, 1, seed=0)
        first = vecs[:10, 0]
        second = vecs[10:, 0]
        assert np.all(np.sign(first) == np.sign(first[0]))
        assert np.all(np.sign(second) == -np.sign(first[0]))
        # dense oracle agreement
        dense = jacobi_eigh(dense_normalized(g, d))
        top = dense.values[np.argmax(np.abs(dense.values))]
        assert abs(lam[0] - top) < 1e-8

    def test_sampled_model_matches_dense_oracle(self):
        params = reference_params(n=100, d=12.0)
        sup = construct_latent_support(np.array([0.1, 0.3, 0.6]))
        graph, _ = sample_graph(params, sup, seed=5)
        lam, v = spectral_embedding(graph, params.d, 2, seed=1)
        dense = jacobi_eigh(dense_normalized(graph, params.d))
        idx = np.argsort(-np.abs(dense.values), kind="stable")[:2]
        want = np.sort(dense.values[idx])[::-1]
        assert np.abs(lam - want).max() < 1e-8

    def test_empty_graph_rank_one(self):
        g = SparseGraph.from_edges(30, [], [])
        lam, v = spectral_embedding(g, 3.0, 1, seed=2)
        assert abs(lam[0] + 3.0) < 1e-8
        ones = np.ones(30) / np.sqrt(30)
        assert min(np.abs(v[:, 0] - ones).max(), np.abs(v[:, 0] + ones).max()) < 1e-6

    def test_residual_invariant(self):
        params = reference_params(n=300, d=12.0)
        sup = construct_latent_support(np.array([0.1, 0.3, 0.6]))
        graph, _ = sample_graph(params, sup, seed=9)
        lam, v = spectral_embedding(graph, params.d, 2, seed=3)
        m = dense_normalized(graph, params.d)
        for j in range(2):
            r = np.linalg.norm(m @ v[:, j] - lam[j] * v[:, j])
            assert r <= 1e-6 * max(1.0, abs(lam[j]))

    def test_isomorphic_relabeling_permutes_embedding(self):
        params = reference_params(n=80, d=15.0)
        sup = construct_latent_support(np.array([0.1, 0.3, 0.6]))
        graph, _ = sample_graph(params, sup, seed=21)
        perm = stream(3, "perm").permutation(80)
        edges = graph.edge_array()
        g2 = SparseGraph.from_edges(80, perm[edges[:, 0]], perm[edges[:, 1]])
        lam1, v1 = spectral_embedding(graph, params.d, 2, seed=4)
        lam2, v2 = spectral_embedding(g2, params.d, 2, seed=4)
        assert np.abs(lam1 - lam2).max() < 1e-7
        for j in range(2):
            a = v1[:, j]
            b = v2[perm, j]
            assert min(np.abs(a - b).max(), np.abs(a + b).max()) < 1e-5


class TestScaleEigenvectors:
    def test_row_arithmetic(self):
        v = np.array([[0.5, 0.5]])
        y = scale_eigenvectors(v, np.array([9.0, 5.0]), np.array([2.0, 1.5]), 4)
        assert np.array_equal(y, [[2.0, 1.5]])

    def test_subunit_eigenvalue_still_scales(self):
        v = np.array([[1.0, 1.0]])
        y = scale_eigenvectors(v, np.array([3.0, 1.0]), np.array([2.0, 0.5]), 1)
        assert np.array_equal(y, [[2.0, 0.5]])

    def test_bitwise_recompute(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal((10, 2))
        lam = np.array([4.0, -3.0])
        r = np.array([1.7, -0.4])
        y1 = scale_eigenvectors(v, lam, r, 10)
        y2 = scale_eigenvectors(v, lam, r, 10)
        assert np.array_equal(y1, y2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            scale_eigenvectors(np.ones((3, 2)), np.ones(2), np.ones(3), 3)

    def test_descending_signed_pairing(self):
        v = np.eye(3)[:, :2]
        y = scale_eigenvectors(v, np.array([5.0, -8.0]), np.array([-2.5, 1.2]), 1)
        # r sorted descending signed: (1.2, -2.5); positional pairing
        assert np.allclose(y[0], [1.2, 0.0])
        assert np.allclose(y[1], [0.0, -2.5])


def test_make_embedding_consistency():
    params = reference_params(n=200, d=12.0)
    sup = construct_latent_support(np.array([0.1, 0.3, 0.6]))
    graph, _ = sample_graph(params, sup, seed=13)
    emb = make_embedding(graph, params.d, params.r_eigs.values, seed=8)
    assert np.abs(emb.vectors.T @ emb.vectors - np.eye(2)).max() < 1e-8
    want = np.sqrt(graph.n) * emb.vectors * emb.r_used[None, :]
    assert np.array_equal(emb.y, want)
    assert np.all(np.diff(emb.lam) <= 0)
    assert np.all(np.diff(emb.r_used) <= 0)
