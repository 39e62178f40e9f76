"""Symmetric eigensolvers and spectral matrix functions.

Dense decompositions use a cyclic Jacobi rotation sweep (numba-compiled), which
is exact enough to serve as the oracle for the iterative solver. Large sparse
problems go through ``lanczos_topk``, a seeded Lanczos iteration with full
reorthogonalization that extracts the top-k eigenpairs by magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .rng import stream

__all__ = [
    "ConvergenceError",
    "EigenDecomposition",
    "SymmetricOperator",
    "symmetrize",
    "jacobi_eigh",
    "lanczos_topk",
    "spectral_map",
]


class ConvergenceError(RuntimeError):
    """Iterative solver failed to reach tolerance within its iteration budget."""

    def __init__(self, message: str, residuals: np.ndarray | None = None):
        super().__init__(message)
        self.residuals = residuals


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Exactly symmetric float64 copy of a square matrix.

    ``(a + a.T) / 2`` is bitwise symmetric because IEEE addition commutes.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return (a + a.T) / 2.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted by descending signed value, paired column-wise."""

    values: np.ndarray   # (k,)
    vectors: np.ndarray  # (n, k), orthonormal columns

    def __post_init__(self):
        self.values.setflags(write=False)
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class SymmetricOperator:
    """Matrix-vector product contract for a symmetric matrix never materialized."""

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]


@njit(cache=True)
def _jacobi_sweeps(a, v, rel_tol, max_sweeps):  # pragma: no cover - compiled
    n = a.shape[0]
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j] * a[i, j]
    norm = np.sqrt(norm)
    if norm == 0.0:
        return 0
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if np.sqrt(off) <= rel_tol * norm:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                app = a[p, p]
                apq_ = apq
                a[p, p] = app - t * apq_
                a[q, q] = a[q, q] + t * apq_
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[p, k] = a[k, p]
                        a[k, q] = s * akp + c * akq
                        a[q, k] = a[k, q]
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1


def jacobi_eigh(s_mat: np.ndarray) -> EigenDecomposition:
    """Full decomposition of a dense symmetric matrix by cyclic Jacobi rotations.

    Deterministic for a fixed input; values come back in descending signed
    order with matching orthonormal columns.
    """
    a = symmetrize(s_mat)
    n = a.shape[0]
    v = np.eye(n)
    if n > 1:
        status = _jacobi_sweeps(a, v, 1e-14, 60)
        if status < 0:
            raise ConvergenceError("Jacobi sweeps did not converge")
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=v[:, order].copy())


class _LanczosState:
    """Growing orthonormal basis split into restart blocks."""

    def __init__(self, n: int, capacity: int):
        self.n = n
        self.q = np.zeros((n, capacity))
        self.m = 0
        self.closed: list[tuple[list[float], list[float]]] = []
        self.alphas: list[float] = []
        self.betas: list[float] = []

    def all_blocks(self):
        if self.alphas:
            return self.closed + [(self.alphas, self.betas)]
        return list(self.closed)

    def close_block(self):
        if self.alphas:
            self.closed.append((self.alphas, self.betas))
            self.alphas, self.betas = [], []

    def ritz(self, k: int, beta_next: float):
        """Top-k Ritz pairs by |theta| with residual estimates."""
        blocks = self.all_blocks()
        active = len(blocks) - 1 if self.alphas else -1
        thetas, owners, zs = [], [], []
        for bi, (al, be) in enumerate(blocks):
            m = len(al)
            t = np.diag(np.asarray(al))
            if m > 1:
                b = np.asarray(be[: m - 1])
                t += np.diag(b, 1) + np.diag(b, -1)
            w, z = np.linalg.eigh(t)
            thetas.extend(w.tolist())
            owners.extend([bi] * m)
            zs.extend(z[:, i] for i in range(m))
        thetas = np.asarray(thetas)
        order = np.argsort(-np.abs(thetas), kind="stable")[:k]
        sel = thetas[order]
        resids = np.array(
            [
                abs(beta_next * zs[idx][-1]) if owners[idx] == active else 0.0
                for idx in order
            ]
        )
        return sel, order, owners, zs, resids

    def assemble(self, order, owners, zs, thetas):
        blocks = self.all_blocks()
        starts = np.cumsum([0] + [len(a) for a, _ in blocks])
        vecs = np.empty((self.n, len(order)))
        for i, idx in enumerate(order):
            bi = owners[idx]
            cols = self.q[:, starts[bi]:starts[bi] + len(zs[idx])]
            vecs[:, i] = cols @ zs[idx]
        return vecs


def lanczos_topk(
    op: SymmetricOperator,
    k: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
    seed: int = 0,
) -> EigenDecomposition:
    """Top-k eigenpairs by magnitude of a symmetric operator.

    Lanczos with full reorthogonalization. On breakdown (an invariant subspace
    was captured) the iteration restarts with a fresh seeded vector in the
    orthogonal complement, so degenerate spectra are handled. The selected k
    pairs are re-sorted by descending signed value. Residuals satisfy
    ``|M v - lambda v| <= tol * max(1, |lambda|)`` per pair.
    """
    n = op.dim
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= dim, got k={k}, dim={n}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 10 * k + 200
    rng = stream(seed, "lanczos")
    cap = min(max_iter, n)
    st = _LanczosState(n, cap)

    q_prev = np.zeros(n)
    q_cur = None
    beta = 0.0
    norm_est = 1.0
    best_resid = None

    def fresh_vector():
        for _ in range(50):
            v = rng.standard_normal(n)
            if st.m:
                qm = st.q[:, : st.m]
                v -= qm @ (qm.T @ v)
                v -= qm @ (qm.T @ v)
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                return v / nv
        raise ConvergenceError("could not generate a new start vector")

    def finish(sel, order, owners, zs, check: bool):
        vecs = st.assemble(order, owners, zs, sel)
        if check:
            for i in range(len(sel)):
                r = np.linalg.norm(op.matvec(vecs[:, i]) - sel[i] * vecs[:, i])
                if r > tol * max(1.0, abs(sel[i])):
                    return None
        by_signed = np.argsort(-sel, kind="stable")
        return EigenDecomposition(
            values=sel[by_signed].copy(), vectors=vecs[:, by_signed].copy()
        )

    while True:
        if q_cur is None:
            st.close_block()
            q_cur = fresh_vector()
            q_prev = np.zeros(n)
            beta = 0.0

        w = op.matvec(q_cur)
        if w.shape != (n,):
            raise ValueError("operator returned a vector of wrong shape")
        alpha = float(q_cur @ w)
        w = w - alpha * q_cur - beta * q_prev
        st.q[:, st.m] = q_cur
        st.m += 1
        qm = st.q[:, : st.m]
        # full reorthogonalization, twice for floating-point safety
        w -= qm @ (qm.T @ w)
        w -= qm @ (qm.T @ w)
        st.alphas.append(alpha)
        beta_new = float(np.linalg.norm(w))
        norm_est = max(norm_est, abs(alpha), beta_new)

        check_every = 10 if st.m <= 200 else 25
        breakdown = beta_new <= 1e-12 * norm_est
        exhausted = st.m >= max_iter or st.m >= n
        if st.m >= k and (st.m % check_every == 0 or breakdown or exhausted):
            sel, order, owners, zs, resids = st.ritz(k, beta_new)
            best_resid = resids
            if np.all(resids <= tol * np.maximum(1.0, np.abs(sel))):
                out = finish(sel, order, owners, zs, check=True)
                if out is not None:
                    return out

        if exhausted:
            if st.m >= n:
                # whole space spanned: Ritz pairs exact up to roundoff
                sel, order, owners, zs, _ = st.ritz(k, beta_new)
                return finish(sel, order, owners, zs, check=False)
            raise ConvergenceError(
                f"Lanczos did not converge in {max_iter} iterations "
                f"(best residual estimates: {best_resid})",
                residuals=best_resid,
            )

        if breakdown:
            q_cur = None  # invariant subspace captured; restart in complement
        else:
            q_prev = q_cur
            q_cur = w / beta_new
            beta = beta_new
            st.betas.append(beta_new)


def spectral_map(s_mat: np.ndarray, f: Callable[[float], float]) -> np.ndarray:
    """Apply a scalar function to the spectrum: ``U diag(f(r)) U^T``.

    The result shares eigenvectors with the input, so it commutes with it.
    """
    eig = jacobi_eigh(s_mat)
    fvals = np.array([f(v) for v in eig.values], dtype=float)
    if not np.isfinite(fvals).all():
        raise ValueError("spectral function is non-finite on the spectrum")
    return symmetrize((eig.vectors * fvals) @ eig.vectors.T)
