"""Comparison methods: k-means and an EM-fitted full-covariance GMM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.special

from .embed import spectral_embedding
from .mixture import gaussian_mixture_log_densities
from .model import SparseGraph
from .rng import derive_seed, stream

__all__ = [
    "KmeansFit",
    "EmGmmFit",
    "kmeans",
    "em_gmm",
    "em_map_labels",
    "uninformed_pipeline",
]


@dataclass(frozen=True)
class KmeansFit:
    centers: np.ndarray
    labels: np.ndarray
    inertia: float
    inertia_path: tuple  # per-iteration inertia of the winning restart
    n_iter: int


@dataclass(frozen=True)
class EmGmmFit:
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    log_likelihood: float
    n_iter: int
    loglik_path: tuple


def _plusplus_init(
    points: np.ndarray, kk: int, rng: np.random.Generator
) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((kk, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, kk):
        total = closest.sum()
        if total <= 0.0:
            centers[c] = points[rng.integers(n)]  # all points on centers
            continue
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(closest), r))
        centers[c] = points[min(idx, n - 1)]
        closest = np.minimum(closest, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _assign(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)  # ties to lowest index
    return labels, d2


def kmeans(
    points: np.ndarray,
    kk: int,
    restarts: int = 50,
    max_iter: int = 300,
    tol: float = 1e-10,
    seed: int = 0,
) -> KmeansFit:
    """Best-inertia Lloyd fit over k-means++ restarts.

    Empty clusters are repaired by re-seeding them on the point currently
    farthest from its assigned center. Deterministic per seed; the best
    restart is chosen by (inertia, restart index).
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n < kk:
        raise ValueError(f"need at least K={kk} points, got {n}")
    best = None
    for r in range(restarts):
        rng = stream(seed, "kmeans", r)
        centers = _plusplus_init(points, kk, rng)
        path = []
        prev = np.inf
        labels = None
        for it in range(max_iter):
            labels, d2 = _assign(points, centers)
            taken = set()
            for k in range(kk):
                if not np.any(labels == k):
                    per_point = d2[np.arange(n), labels]
                    per_point[list(taken)] = -np.inf
                    far = int(np.argmax(per_point))
                    centers[k] = points[far]
                    labels[far] = k
                    taken.add(far)
            inertia = float(
                np.sum((points - centers[labels]) ** 2)
            )
            path.append(inertia)
            for k in range(kk):
                centers[k] = points[labels == k].mean(axis=0)
            if prev - inertia <= tol * max(abs(prev), 1e-300):
                break
            prev = inertia
        labels, d2 = _assign(points, centers)
        inertia = float(d2[np.arange(n), labels].sum())
        path.append(inertia)
        if best is None or inertia < best.inertia:
            best = KmeansFit(
                centers=centers.copy(),
                labels=labels,
                inertia=inertia,
                inertia_path=tuple(path),
                n_iter=len(path) - 1,
            )
    return best


def _init_from_kmeans(
    points: np.ndarray, kk: int, init: KmeansFit, ridge: float | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, dim = points.shape
    weights = np.empty(kk)
    means = np.empty((kk, dim))
    covs = np.empty((kk, dim, dim))
    for k in range(kk):
        mask = init.labels == k
        weights[k] = max(mask.sum(), 1) / n
        members = points[mask] if mask.any() else points
        means[k] = members.mean(axis=0)
        diff = members - means[k]
        cov = diff.T @ diff / max(members.shape[0], 1)
        lam = ridge if ridge is not None else 1e-6 * max(np.trace(cov), 1e-300) / dim
        covs[k] = cov + lam * np.eye(dim)
    weights /= weights.sum()
    return weights, means, covs


def em_gmm(
    points: np.ndarray,
    kk: int,
    init: KmeansFit,
    max_iter: int = 200,
    rel_tol: float = 1e-8,
    ridge: float | None = None,
    seed: int = 0,
) -> EmGmmFit:
    """Full-covariance EM started from k-means assignment statistics.

    A component whose weight collapses below 1/(10n) is re-seeded on the
    point farthest from every component mean, at most 3 times.
    """
    points = np.asarray(points, dtype=float)
    n, dim = points.shape
    if n < kk * (dim + 1):
        raise ValueError("too few points for a full-covariance fit")
    weights, means, covs = _init_from_kmeans(points, kk, init, ridge)
    path = []
    prev = -np.inf
    reseeds = 0
    it = 0
    while it < max_iter:
        lp = gaussian_mixture_log_densities(weights, means, covs, points)
        row_ll = scipy.special.logsumexp(lp, axis=1)
        ll = float(row_ll.sum())
        path.append(ll)
        resp = np.exp(lp - row_ll[:, None])
        mass = resp.sum(axis=0)

        collapsed = np.flatnonzero(mass / n < 1.0 / (10.0 * n))
        if collapsed.size:
            if reseeds >= 3:
                raise RuntimeError(
                    f"EM component(s) {collapsed.tolist()} collapsed repeatedly"
                )
            reseeds += 1
            d2 = np.min(
                np.sum((points[:, None, :] - means[None, :, :]) ** 2, axis=2),
                axis=1,
            )
            data_cov = np.atleast_2d(np.cov(points.T))
            data_cov = data_cov + np.eye(dim) * (
                1e-6 * max(np.trace(data_cov), 1e-300) / dim
            )
            for k in collapsed:
                far = int(np.argmax(d2))
                means[k] = points[far]
                covs[k] = data_cov
                weights[k] = 1.0 / kk
                d2[far] = -np.inf
            weights /= weights.sum()
            prev = -np.inf
            path = []  # restart the recorded (monotone) run
            it += 1
            continue

        if ll - prev <= rel_tol * abs(ll) and it > 0:
            break
        prev = ll

        weights = mass / n
        means = (resp.T @ points) / mass[:, None]
        for k in range(kk):
            diff = points - means[k]
            cov = (resp[:, k][:, None] * diff).T @ diff / mass[k]
            cov = (cov + cov.T) / 2.0
            lam = ridge if ridge is not None else 1e-6 * max(np.trace(cov), 1e-300) / dim
            covs[k] = cov + lam * np.eye(dim)
        it += 1
    if not path:  # max_iter landed right after a re-seed
        lp = gaussian_mixture_log_densities(weights, means, covs, points)
        path.append(float(scipy.special.logsumexp(lp, axis=1).sum()))
    return EmGmmFit(
        weights=weights,
        means=means,
        covs=covs,
        log_likelihood=path[-1],
        n_iter=it,
        loglik_path=tuple(path),
    )


def em_map_labels(fit: EmGmmFit, points: np.ndarray) -> np.ndarray:
    """MAP component labels under a fitted mixture."""
    lp = gaussian_mixture_log_densities(fit.weights, fit.means, fit.covs, points)
    return np.argmax(lp, axis=1)


def em_gmm_best_of(
    points: np.ndarray,
    kk: int,
    seed: int,
    n_inits: int = 10,
    kmeans_restarts: int = 1,
    **em_kwargs,
) -> EmGmmFit:
    """Best final log-likelihood over several k-means-seeded EM runs."""
    best = None
    for i in range(n_inits):
        init = kmeans(
            points, kk, restarts=kmeans_restarts, seed=derive_seed(seed, "em-init", i)
        )
        fit = em_gmm(points, kk, init, seed=derive_seed(seed, "em", i), **em_kwargs)
        if best is None or fit.log_likelihood > best.log_likelihood:
            best = fit
    return best


def uninformed_pipeline(
    graph: SparseGraph,
    d: float,
    kk: int,
    seed: int,
    em_inits: int = 10,
    kmeans_restarts: int = 50,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster the unscaled eigenvector rows of the centered adjacency matrix.

    Returns (EM-GMM MAP labels, k-means labels), both on the rows of the
    K-1 leading (by magnitude) eigenvectors.
    """
    if kk < 2:
        raise ValueError("need at least two communities")
    _, v = spectral_embedding(
        graph, d, kk - 1, seed=derive_seed(seed, "embed"), tol=tol, max_iter=max_iter
    )
    return uninformed_from_embedding(
        v, kk, seed, em_inits=em_inits, kmeans_restarts=kmeans_restarts
    )


def uninformed_from_embedding(
    v: np.ndarray,
    kk: int,
    seed: int,
    em_inits: int = 10,
    kmeans_restarts: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Baselines on precomputed eigenvector rows (shared-embedding variant)."""
    em_fit = em_gmm_best_of(v, kk, seed=derive_seed(seed, "em-gmm"), n_inits=em_inits)
    em_labels = em_map_labels(em_fit, v)
    km = kmeans(v, kk, restarts=kmeans_restarts, seed=derive_seed(seed, "kmeans"))
    return em_labels, km.labels
