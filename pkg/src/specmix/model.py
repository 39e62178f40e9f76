"""Degree-balanced block model: parameters, latent support, graph sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import EigenDecomposition, jacobi_eigh, symmetrize
from .rng import stream

__all__ = [
    "LatentSupport",
    "SbmParams",
    "SparseGraph",
    "ValidityReport",
    "construct_latent_support",
    "validate_model",
    "block_probabilities",
    "sample_graph",
]


@dataclass(frozen=True)
class LatentSupport:
    """K latent points in dimension K-1 with zero weighted mean and
    identity weighted second moment."""

    mu: np.ndarray  # (K, s)
    p: np.ndarray   # (K,)

    def __post_init__(self):
        self.mu.setflags(write=False)
        self.p.setflags(write=False)

    @property
    def n_components(self) -> int:
        return self.p.shape[0]

    @property
    def dim(self) -> int:
        return self.mu.shape[1]

    @property
    def degenerate(self) -> bool:
        return self.dim == 0


def _check_weights(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("probability vector must be 1-D and non-empty")
    if np.any(p <= 0):
        raise ValueError("all class probabilities must be positive")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
    return p


def construct_latent_support(p) -> LatentSupport:
    """Recursive simplex construction of the latent support for weights p.

    Coordinate j (1-based) of point k is 0 for k < j,
    sqrt((1-s_j)/(p_j (1-s_{j-1}))) for k = j, and
    -sqrt(p_j/((1-s_j)(1-s_{j-1}))) for k > j, with s_j = p_1 + ... + p_j.
    Both moment constraints hold by construction.
    """
    p = _check_weights(p)
    kk = p.size
    s = kk - 1
    mu = np.zeros((kk, s))
    cum = np.concatenate([[0.0], np.cumsum(p)])
    for j in range(1, kk):  # latent coordinate j lives in column j-1
        sj, sjm1 = cum[j], cum[j - 1]
        pj = p[j - 1]
        mu[j - 1, j - 1] = math.sqrt((1.0 - sj) / (pj * (1.0 - sjm1)))
        mu[j:, j - 1] = -math.sqrt(pj / ((1.0 - sj) * (1.0 - sjm1)))
    return LatentSupport(mu=mu, p=p.copy())


@dataclass(frozen=True)
class SbmParams:
    """Model tuple (n, p, d, R) plus the derived noise scale and spectrum of R."""

    n: int
    p: np.ndarray
    d: float
    R: np.ndarray
    sigma: float = field(init=False, default=0.0)
    r_eigs: EigenDecomposition = field(init=False, default=None)

    def __post_init__(self):
        p = _check_weights(self.p)
        if not 0 < self.d < self.n:
            raise ValueError(f"need 0 < d < n, got d={self.d}, n={self.n}")
        r = symmetrize(self.R)
        s = p.size - 1
        if r.shape != (s, s):
            raise ValueError(f"R must be {s}x{s} for K={p.size}, got {r.shape}")
        object.__setattr__(self, "p", p.copy())
        object.__setattr__(self, "R", r)
        object.__setattr__(
            self, "sigma", math.sqrt(self.d * (self.n - self.d) / self.n)
        )
        object.__setattr__(self, "r_eigs", jacobi_eigh(r) if s else None)
        self.p.setflags(write=False)
        self.R.setflags(write=False)

    @property
    def n_communities(self) -> int:
        return self.p.size

    @property
    def latent_dim(self) -> int:
        return self.p.size - 1


@dataclass(frozen=True)
class SparseGraph:
    """Undirected simple graph as sorted per-node neighbor lists (CSR layout)."""

    n: int
    indptr: np.ndarray   # (n+1,)
    indices: np.ndarray  # (2*edge_count,)
    edge_count: int

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, u, v) -> "SparseGraph":
        """Build from endpoint arrays; drops self-loops and duplicate edges."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.size and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
            raise ValueError("edge endpoint out of range")
        keep = u != v
        lo = np.minimum(u[keep], v[keep])
        hi = np.maximum(u[keep], v[keep])
        codes = np.unique(lo * n + hi)
        lo, hi = codes // n, codes % n
        ends = np.concatenate([lo, hi])
        starts = np.concatenate([hi, lo])
        order = np.lexsort((ends, starts))
        indices = ends[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, starts + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n=n, indptr=indptr, indices=indices, edge_count=lo.size)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_array(self) -> np.ndarray:
        """(edge_count, 2) array of edges with i < j, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), self.degrees())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        src = np.repeat(np.arange(self.n), self.degrees())
        a[src, self.indices] = 1.0
        return a


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    violations: tuple  # of (k, l, q_kl)


def block_probabilities(params: SbmParams, support: LatentSupport) -> np.ndarray:
    """K x K matrix of edge probabilities q_kl = d/n + (sigma/n) mu_k^T R mu_l."""
    if support.dim != params.latent_dim:
        raise ValueError("support dimension does not match parameters")
    inner = support.mu @ params.R @ support.mu.T if support.dim else np.zeros(
        (support.n_components, support.n_components)
    )
    return params.d / params.n + (params.sigma / params.n) * inner


def validate_model(params: SbmParams, support: LatentSupport) -> ValidityReport:
    """Check every block probability lies in [0, 1]."""
    q = block_probabilities(params, support)
    bad = []
    kk = q.shape[0]
    for k in range(kk):
        for l in range(k, kk):
            if not 0.0 <= q[k, l] <= 1.0:
                bad.append((k, l, float(q[k, l])))
    return ValidityReport(ok=not bad, violations=tuple(bad))


def _geometric_hits(rng: np.random.Generator, q: float, n_pairs: int) -> np.ndarray:
    """Indices of successes in n_pairs Bernoulli(q) trials via geometric jumps."""
    if n_pairs == 0 or q <= 0.0:
        return np.empty(0, dtype=np.int64)
    if q >= 1.0:
        return np.arange(n_pairs, dtype=np.int64)
    out = []
    pos = -1
    batch = max(16, int(n_pairs * q * 1.2) + 16)
    while True:
        jumps = rng.geometric(q, size=batch)
        pos_arr = pos + np.cumsum(jumps)
        cut = np.searchsorted(pos_arr, n_pairs)
        out.append(pos_arr[:cut])
        if cut < pos_arr.size:
            break
        pos = int(pos_arr[-1])
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)


def _triangular_decode(t: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Map flat index t in [0, m(m-1)/2) to the pair (i, j), i < j, in
    lexicographic order."""
    # row i satisfies off(i) <= t < off(i+1) with off(i) = i*m - i(i+1)/2
    i = np.floor(
        (2 * m - 1 - np.sqrt((2 * m - 1) ** 2 - 8.0 * t)) / 2.0
    ).astype(np.int64)
    off = i * m - i * (i + 1) // 2
    # guard against floating point at block boundaries
    over = t < off
    i[over] -= 1
    off = i * m - i * (i + 1) // 2
    under = t >= off + (m - 1 - i)
    i[under] += 1
    off = i * m - i * (i + 1) // 2
    j = t - off + i + 1
    return i, j


def sample_graph(
    params: SbmParams, support: LatentSupport, seed: int
) -> tuple[SparseGraph, np.ndarray]:
    """Sample (graph, labels) from the block model.

    Labels are i.i.d. from p. Edges are sampled per unordered community pair
    with geometric jump sampling, so the cost is O(E + K^2) rather than O(n^2).
    Deterministic for a fixed seed.
    """
    report = validate_model(params, support)
    if not report.ok:
        raise ValueError(
            f"model is invalid; block probabilities out of [0,1]: {report.violations}"
        )
    n, kk = params.n, params.n_communities
    q = block_probabilities(params, support)
    labels = stream(seed, "labels").choice(kk, size=n, p=params.p)
    groups = [np.flatnonzero(labels == k) for k in range(kk)]
    edge_rng = stream(seed, "edges")

    us, vs = [], []
    for k in range(kk):
        for l in range(k, kk):
            gk, gl = groups[k], groups[l]
            if k == l:
                m = gk.size
                hits = _geometric_hits(edge_rng, float(q[k, k]), m * (m - 1) // 2)
                if hits.size:
                    i, j = _triangular_decode(hits, m)
                    us.append(gk[i])
                    vs.append(gk[j])
            else:
                hits = _geometric_hits(
                    edge_rng, float(q[k, l]), gk.size * gl.size
                )
                if hits.size:
                    us.append(gk[hits // gl.size])
                    vs.append(gl[hits % gl.size])
    u = np.concatenate(us) if us else np.empty(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.empty(0, dtype=np.int64)
    return SparseGraph.from_edges(n, u, v), labels
