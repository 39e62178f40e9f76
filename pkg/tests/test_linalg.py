import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specmix.linalg import (
    ConvergenceError,
    SymmetricOperator,
    jacobi_eigh,
    lanczos_topk,
    spectral_map,
    symmetrize,
)

from conftest import random_symmetric


def charpoly_roots(a: np.ndarray) -> np.ndarray:
    """Eigenvalue oracle: characteristic polynomial coefficients by the
    Faddeev-LeVerrier recursion, roots by the companion matrix (np.roots).
    Shares no code with the Jacobi path."""
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m
        c = -np.trace(m) / k
        coeffs[k] = c
        m += c * np.eye(n)
    roots = np.roots(coeffs)
    assert np.abs(roots.imag).max() < 1e-8
    return np.sort(roots.real)[::-1]


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    sv = np.linalg.svd(u.T @ v, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))


def operator_from_dense(a: np.ndarray) -> SymmetricOperator:
    return SymmetricOperator(dim=a.shape[0], matvec=lambda x: a @ x)


class TestSymmetrize:
    def test_exact_symmetry(self, rng):
        a = rng.standard_normal((7, 7))
        s = symmetrize(a)
        assert np.array_equal(s, s.T)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            symmetrize(np.ones((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            symmetrize(np.array([[1.0, np.nan], [np.nan, 1.0]]))


class TestJacobi:
    def test_diagonal_input(self):
        eig = jacobi_eigh(np.diag([3.0, 1.0, -2.0]))
        assert np.array_equal(eig.values, [3.0, 1.0, -2.0])
        assert np.array_equal(eig.vectors, np.eye(3))

    def test_two_by_two_exchange(self):
        eig = jacobi_eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(eig.values, [1.0, -1.0], atol=1e-14)
        want = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        for j in range(2):
            col = eig.vectors[:, j]
            assert min(np.abs(col - want[:, j]).max(), np.abs(col + want[:, j]).max()) < 1e-12

    def test_matches_charpoly_oracle(self, rng):
        a = random_symmetric(rng, 5)
        eig = jacobi_eigh(a)
        assert np.abs(eig.values - charpoly_roots(a)).max() < 1e-8

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            jacobi_eigh(np.array([[np.inf, 0.0], [0.0, 1.0]]))

    def test_deterministic(self, rng):
        a = random_symmetric(rng, 6)
        e1, e2 = jacobi_eigh(a), jacobi_eigh(a)
        assert np.array_equal(e1.values, e2.values)
        assert np.array_equal(e1.vectors, e2.vectors)

    @pytest.mark.parametrize("dim", [1, 2, 3, 8, 20])
    def test_orthonormal_and_reconstructs(self, rng, dim):
        a = random_symmetric(rng, dim)
        eig = jacobi_eigh(a)
        assert np.abs(eig.vectors.T @ eig.vectors - np.eye(dim)).max() < 1e-10
        recon = (eig.vectors * eig.values) @ eig.vectors.T
        assert np.linalg.norm(recon - a) <= 1e-8 * np.linalg.norm(a)
        assert np.all(np.diff(eig.values) <= 1e-12)


class TestLanczos:
    def test_magnitude_selection_signed_order(self):
        op = operator_from_dense(np.diag([3.0, -2.0, 1.0]))
        eig = lanczos_topk(op, 2, seed=0)
        assert np.allclose(eig.values, [3.0, -2.0], atol=1e-10)

    def test_degenerate_identity(self):
        op = SymmetricOperator(dim=10, matvec=lambda x: x.copy())
        eig = lanczos_topk(op, 2, seed=5)
        assert np.allclose(eig.values, [1.0, 1.0], atol=1e-12)
        assert np.abs(eig.vectors.T @ eig.vectors - np.eye(2)).max() < 1e-10

    def test_matches_dense_oracle_sparse50(self, rng):
        a = random_symmetric(rng, 50, density=0.1)
        eig = lanczos_topk(operator_from_dense(a), 3, seed=11)
        dense = jacobi_eigh(a)
        top = np.argsort(-np.abs(dense.values), kind="stable")[:3]
        want_vals = np.sort(dense.values[top])[::-1]
        assert np.abs(np.abs(eig.values) - np.abs(want_vals)).max() <= 1e-8
        angles = principal_angles(eig.vectors, dense.vectors[:, top])
        assert angles.max() <= 1e-6

    def test_residual_contract(self, rng):
        a = random_symmetric(rng, 80, density=0.2)
        op = operator_from_dense(a)
        eig = lanczos_topk(op, 4, tol=1e-8, seed=2)
        for j in range(4):
            r = np.linalg.norm(a @ eig.vectors[:, j] - eig.values[j] * eig.vectors[:, j])
            assert r <= 1e-8 * max(1.0, abs(eig.values[j]))

    def test_deterministic_per_seed(self, rng):
        a = random_symmetric(rng, 40, density=0.3)
        op = operator_from_dense(a)
        e1 = lanczos_topk(op, 3, seed=9)
        e2 = lanczos_topk(op, 3, seed=9)
        assert np.array_equal(e1.values, e2.values)
        assert np.array_equal(e1.vectors, e2.vectors)

    def test_non_convergence_raises(self, rng):
        a = random_symmetric(rng, 60)
        with pytest.raises(ConvergenceError) as err:
            lanczos_topk(operator_from_dense(a), 2, tol=1e-14, max_iter=4, seed=0)
        assert err.value.residuals is not None

    def test_k_bounds(self):
        op = SymmetricOperator(dim=3, matvec=lambda x: x)
        with pytest.raises(ValueError):
            lanczos_topk(op, 4)
        with pytest.raises(ValueError):
            lanczos_topk(op, 0)

    @pytest.mark.parametrize("dim,k", [(30, 2), (120, 3), (300, 4)])
    def test_agrees_with_jacobi_through_dim_300(self, rng, dim, k):
        a = random_symmetric(rng, dim, density=min(1.0, 10.0 / dim))
        eig = lanczos_topk(operator_from_dense(a), k, seed=dim)
        dense = jacobi_eigh(a)
        top = np.argsort(-np.abs(dense.values), kind="stable")[:k]
        want = np.sort(dense.values[top])[::-1]
        assert np.abs(eig.values - want).max() <= 1e-8


class TestSpectralMap:
    def build(self):
        # S with eigenvalues (2.5, 0.7) and a fixed non-trivial eigenbasis
        u = np.array([[0.6, -0.8], [0.8, 0.6]])
        return (u * [2.5, 0.7]) @ u.T, u

    def test_truncate_above(self):
        s, u = self.build()
        out = spectral_map(s, lambda r: max(abs(r), 1.0))
        want = (u * [2.5, 1.0]) @ u.T
        assert np.abs(out - want).max() < 1e-12

    def test_truncate_below(self):
        s, u = self.build()
        out = spectral_map(s, lambda r: min(abs(r), 1.0))
        want = (u * [1.0, 0.7]) @ u.T
        assert np.abs(out - want).max() < 1e-12

    def test_mean_factor_values(self):
        s, u = self.build()
        out = spectral_map(s, lambda r: np.sqrt(max(r * r - 1.0, 0.0)))
        vals = np.linalg.eigvalsh(out)
        assert np.allclose(np.sort(vals)[::-1], [np.sqrt(5.25), 0.0], atol=1e-12)

    def test_identity_map_is_identity(self, rng):
        s = random_symmetric(rng, 5)
        assert np.abs(spectral_map(s, lambda r: r) - s).max() < 1e-12

    def test_commutes(self, rng):
        s = random_symmetric(rng, 4)
        m = spectral_map(s, lambda r: r * r + 1.0)
        assert np.abs(m @ s - s @ m).max() < 1e-10

    def test_composition(self, rng):
        s = random_symmetric(rng, 5)
        f = lambda r: abs(r) + 0.5
        g = lambda r: r * r
        via_two = spectral_map(spectral_map(s, f), g)
        direct = spectral_map(s, lambda r: g(f(r)))
        assert np.abs(via_two - direct).max() < 1e-10

    def test_domain_error(self):
        s = np.diag([1.0, 4.0])
        with pytest.raises(ValueError):
            spectral_map(s, lambda r: float("inf") if r == 1.0 else r)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=2**32 - 1))
def test_decomposition_properties(dim, seed):
    a = random_symmetric(np.random.default_rng(seed), dim)
    eig = jacobi_eigh(a)
    assert np.abs(eig.vectors.T @ eig.vectors - np.eye(dim)).max() < 1e-10
    recon = (eig.vectors * eig.values) @ eig.vectors.T
    assert np.linalg.norm(recon - a) <= 1e-8 * max(np.linalg.norm(a), 1e-30)
