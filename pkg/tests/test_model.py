import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from specmix.model import (
    SbmParams,
    SparseGraph,
    block_probabilities,
    construct_latent_support,
    sample_graph,
    validate_model,
)

P_REF = np.array([0.1, 0.3, 0.6])
ROT = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def reference_params(r1=2.6, r2=1.2, n=5000, d=15.0):
    r_mat = (ROT * np.array([max(r1, r2), min(r1, r2)])) @ ROT.T
    return SbmParams(n=n, p=P_REF, d=d, R=r_mat)


def weights_strategy(max_k=8):
    return (
        st.lists(st.floats(0.05, 1.0), min_size=2, max_size=max_k)
        .map(lambda v: np.asarray(v) / np.sum(v))
    )


class TestLatentSupport:
    def test_reference_three_class_values(self):
        sup = construct_latent_support(P_REF)
        want = np.array(
            [
                [3.0, 0.0],
                [-1.0 / 3.0, 2.0 * math.sqrt(5.0) / 3.0],
                [-1.0 / 3.0, -math.sqrt(5.0) / 3.0],
            ]
        )
        assert np.abs(sup.mu - want).max() < 1e-12

    def test_symmetric_two_class(self):
        sup = construct_latent_support([0.5, 0.5])
        assert np.allclose(sup.mu[:, 0], [1.0, -1.0], atol=1e-14)

    def test_two_class_closed_form(self):
        # oracle: solve the two moment equations directly for K=2
        p1, p2 = 0.3, 0.7
        # p1*m1 + p2*m2 = 0 and p1*m1^2 + p2*m2^2 = 1 with m1 > 0
        m1 = math.sqrt(p2 / p1)
        m2 = -math.sqrt(p1 / p2)
        assert abs(p1 * m1 + p2 * m2) < 1e-15
        assert abs(p1 * m1 * m1 + p2 * m2 * m2 - 1.0) < 1e-15
        sup = construct_latent_support([p1, p2])
        assert np.allclose(sup.mu[:, 0], [m1, m2], atol=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            construct_latent_support([0.5, 0.5, 0.0])

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            construct_latent_support([0.5, 0.6])

    def test_single_class_degenerate(self):
        sup = construct_latent_support([1.0])
        assert sup.degenerate and sup.dim == 0

    @settings(max_examples=100, deadline=None)
    @given(weights_strategy())
    def test_moment_constraints(self, p):
        sup = construct_latent_support(p)
        mean = (sup.p[:, None] * sup.mu).sum(axis=0)
        second = np.einsum("k,ki,kj->ij", sup.p, sup.mu, sup.mu)
        assert np.abs(mean).max() < 1e-10
        assert np.abs(second - np.eye(sup.dim)).max() < 1e-10


class TestValidateModel:
    def test_reference_model_valid_and_q_matches_enumeration(self):
        params = reference_params()
        sup = construct_latent_support(P_REF)
        report = validate_model(params, sup)
        assert report.ok
        q = block_probabilities(params, sup)
        for k in range(3):
            for l in range(3):
                direct = params.d / params.n + (
                    params.sigma / params.n
                ) * float(sup.mu[k] @ params.R @ sup.mu[l])
                assert abs(q[k, l] - direct) < 1e-15
        assert q.min() > 0.0

    def test_low_degree_invalid_at_extreme_pair(self):
        params = reference_params(d=5.0)
        sup = construct_latent_support(P_REF)
        report = validate_model(params, sup)
        assert not report.ok
        q = block_probabilities(params, sup)
        want_bad = {
            (k, l)
            for k in range(3)
            for l in range(k, 3)
            if not 0.0 <= q[k, l] <= 1.0
        }
        assert {(k, l) for k, l, _ in report.violations} == want_bad

    def test_zero_signal_always_valid(self):
        params = SbmParams(n=100, p=np.array([0.4, 0.6]), d=3.0, R=np.zeros((1, 1)))
        sup = construct_latent_support([0.4, 0.6])
        assert validate_model(params, sup).ok


class TestSparseGraph:
    def test_dedup_and_self_loops(self):
        g = SparseGraph.from_edges(3, [0, 1, 1, 2], [1, 0, 1, 0])
        assert g.edge_count == 2
        assert list(g.neighbors(0)) == [1, 2]
        assert list(g.neighbors(1)) == [0]

    def test_symmetry_invariant(self, rng):
        u = rng.integers(0, 30, size=100)
        v = rng.integers(0, 30, size=100)
        g = SparseGraph.from_edges(30, u, v)
        a = g.to_dense()
        assert np.array_equal(a, a.T)
        assert np.all(np.diag(a) == 0)
        assert a.sum() == 2 * g.edge_count

    def test_sorted_neighbor_lists(self, rng):
        g = SparseGraph.from_edges(20, rng.integers(0, 20, 60), rng.integers(0, 20, 60))
        for i in range(20):
            nb = g.neighbors(i)
            assert np.all(np.diff(nb) > 0)


class TestSampleGraph:
    def test_erdos_renyi_reduction_mean_degree(self):
        params = SbmParams(n=2000, p=np.array([1.0]), d=10.0, R=np.zeros((0, 0)))
        sup = construct_latent_support([1.0])
        degs = []
        for seed in range(20):
            g, labels = sample_graph(params, sup, seed=seed)
            assert np.all(labels == 0)
            degs.append(2.0 * g.edge_count / g.n)
        assert abs(np.mean(degs) - 10.0) < 0.5

    def test_reference_mean_degree(self):
        params = reference_params()
        sup = construct_latent_support(P_REF)
        degs = [
            2.0 * sample_graph(params, sup, seed=seed)[0].edge_count / params.n
            for seed in range(20)
        ]
        # SE of the mean degree over 20 draws of ~(nd/2) edges
        se = math.sqrt(2.0 * 15.0 / params.n / 20.0)
        assert abs(np.mean(degs) - 15.0) <= 3.0 * se

    def test_seed_replay_identical(self):
        params = reference_params(n=800)
        sup = construct_latent_support(P_REF)
        g1, l1 = sample_graph(params, sup, seed=123)
        g2, l2 = sample_graph(params, sup, seed=123)
        assert np.array_equal(l1, l2)
        assert np.array_equal(g1.indptr, g2.indptr)
        assert np.array_equal(g1.indices, g2.indices)

    def test_refuses_invalid_model(self):
        params = reference_params(d=5.0)
        sup = construct_latent_support(P_REF)
        with pytest.raises(ValueError):
            sample_graph(params, sup, seed=0)

    def test_block_rates_match_q(self):
        # per-block empirical frequencies track the block probabilities
        params = reference_params(n=3000)
        sup = construct_latent_support(P_REF)
        q = block_probabilities(params, sup)
        g, labels = sample_graph(params, sup, seed=7)
        counts = np.zeros((3, 3))
        pairs = np.zeros((3, 3))
        sizes = np.bincount(labels, minlength=3)
        pairs = np.outer(sizes, sizes).astype(float)
        np.fill_diagonal(pairs, sizes * (sizes - 1) / 2.0)
        edges = g.edge_array()
        a, b = labels[edges[:, 0]], labels[edges[:, 1]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        np.add.at(counts, (lo, hi), 1)
        for k in range(3):
            for l in range(k, 3):
                rate = counts[k, l] / pairs[k, l]
                se = math.sqrt(q[k, l] / pairs[k, l])
                assert abs(rate - q[k, l]) < 5.0 * se

    def test_degree_balance_chi2(self):
        # mean degree per community is the same across communities:
        # z-scores of per-seed community means against the common expectation,
        # pooled into a chi-square statistic at the 0.01 level
        params = reference_params()
        sup = construct_latent_support(P_REF)
        per_comm = [[], [], []]
        for seed in range(50):
            g, labels = sample_graph(params, sup, seed=1000 + seed)
            degs = g.degrees()
            for k in range(3):
                per_comm[k].append(degs[labels == k].mean())
        expected = (params.n - 1) * params.d / params.n
        chi2 = 0.0
        for k in range(3):
            vals = np.asarray(per_comm[k])
            t = (vals.mean() - expected) / (vals.std(ddof=1) / math.sqrt(len(vals)))
            chi2 += t * t
        assert chi2 < scipy.stats.chi2.ppf(0.99, df=3)

    def test_edge_count_concentration(self):
        params = reference_params()
        sup = construct_latent_support(P_REF)
        target = params.n * params.d / 2.0
        tolerance = 4.0 * math.sqrt(target)
        hits = sum(
            abs(sample_graph(params, sup, seed=2000 + s)[0].edge_count - target)
            <= tolerance
            for s in range(50)
        )
        assert hits >= 49
