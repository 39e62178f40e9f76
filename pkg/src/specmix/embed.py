"""Rank-s spectral embedding of the centered adjacency matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import SymmetricOperator, lanczos_topk
from .model import SparseGraph

__all__ = [
    "Embedding",
    "normalized_operator",
    "normalized_matvec",
    "spectral_embedding",
    "scale_eigenvectors",
    "make_embedding",
]


@dataclass(frozen=True)
class Embedding:
    """Top eigenpairs of A - (d/n) 11^T and the scaled rows Y."""

    lam: np.ndarray     # (s,) signed eigenvalues, descending signed order
    vectors: np.ndarray  # (n, s) orthonormal columns
    y: np.ndarray       # (n, s) = sqrt(n) * vectors * diag(r_used)
    r_used: np.ndarray  # (s,) eigenvalues used for scaling, same ordering

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def _adjacency_csr(graph: SparseGraph) -> sp.csr_array:
    data = np.ones(graph.indices.size)
    return sp.csr_array(
        (data, graph.indices, graph.indptr), shape=(graph.n, graph.n)
    )


def normalized_operator(graph: SparseGraph, d: float) -> SymmetricOperator:
    """Operator for A - (d/n) 11^T without materializing the rank-one term."""
    a = _adjacency_csr(graph)
    n = graph.n
    shift = d / n

    def matvec(x: np.ndarray) -> np.ndarray:
        return a @ x - (shift * x.sum()) * np.ones(n)

    return SymmetricOperator(dim=n, matvec=matvec)


def normalized_matvec(graph: SparseGraph, d: float, x: np.ndarray) -> np.ndarray:
    """(A - (d/n) 11^T) x in O(E + n)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.n,):
        raise ValueError(f"vector length {x.shape} does not match n={graph.n}")
    return normalized_operator(graph, d).matvec(x)


def spectral_embedding(
    graph: SparseGraph,
    d: float,
    s: int,
    seed: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Top-s by magnitude eigenpairs of the centered adjacency matrix.

    Returns (lam, V) ordered by descending signed eigenvalue.
    """
    if not 0 < s < graph.n:
        raise ValueError(f"need 0 < s < n, got s={s}, n={graph.n}")
    eig = lanczos_topk(
        normalized_operator(graph, d), k=s, tol=tol, max_iter=max_iter, seed=seed
    )
    return eig.values, eig.vectors


def scale_eigenvectors(
    v: np.ndarray, lam: np.ndarray, r_eigs: np.ndarray, n: int
) -> np.ndarray:
    """Scaled rows Y = sqrt(n) * V * diag(r), r sorted by descending signed
    value and paired positionally with the signed-sorted lam."""
    v = np.asarray(v, dtype=float)
    r = np.sort(np.asarray(r_eigs, dtype=float))[::-1]
    if v.ndim != 2 or v.shape[1] != r.size or v.shape[1] != np.asarray(lam).size:
        raise ValueError("column count of V must match the number of eigenvalues")
    return np.sqrt(n) * v * r[None, :]


def make_embedding(
    graph: SparseGraph,
    d: float,
    r_eigs: np.ndarray,
    seed: int,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> Embedding:
    """Embed with s = len(r_eigs) and scale rows by the eigenvalues of R."""
    r = np.sort(np.asarray(r_eigs, dtype=float))[::-1]
    lam, v = spectral_embedding(graph, d, r.size, seed, tol=tol, max_iter=max_iter)
    y = scale_eigenvectors(v, lam, r, graph.n)
    return Embedding(lam=lam, vectors=v, y=y, r_used=r)
