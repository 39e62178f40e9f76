"""Estimate (p, d, R) from a partially labeled graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import math

import numpy as np

from .linalg import symmetrize
from .model import LatentSupport, SparseGraph

__all__ = ["BlockStats", "estimate_block_stats", "estimate_R"]


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class BlockStats:
    """Empirical block edge frequencies from a labeled node subset."""

    q_hat: np.ndarray        # (K, K) symmetric edge frequencies
    pair_counts: np.ndarray  # (K, K) observed pairs per class pair
    p_hat: np.ndarray        # (K,) class frequencies among labeled nodes
    d_hat: float             # 2 * edge_count / n over the full graph


def estimate_block_stats(
    graph: SparseGraph, labeled: Mapping[int, int], kk: int
) -> BlockStats:
    """Block statistics from labeled nodes; degree from the whole graph."""
    nodes = np.fromiter(labeled.keys(), dtype=np.int64, count=len(labeled))
    classes = np.fromiter(labeled.values(), dtype=np.int64, count=len(labeled))
    if nodes.size and (classes.min() < 0 or classes.max() >= kk):
        raise EstimationError(f"class label out of range [0, {kk})")
    sizes = np.bincount(classes, minlength=kk)
    for k in range(kk):
        if sizes[k] < 2:
            raise EstimationError(
                f"class {k} has {sizes[k]} labeled node(s); need at least 2"
            )

    pair_counts = np.outer(sizes, sizes).astype(np.int64)
    np.fill_diagonal(pair_counts, sizes * (sizes - 1) // 2)

    label_of = np.full(graph.n, -1, dtype=np.int64)
    label_of[nodes] = classes
    edges = graph.edge_array()
    a = label_of[edges[:, 0]]
    b = label_of[edges[:, 1]]
    keep = (a >= 0) & (b >= 0)
    a, b = a[keep], b[keep]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    edge_counts = np.zeros((kk, kk), dtype=np.int64)
    np.add.at(edge_counts, (lo, hi), 1)
    edge_counts = edge_counts + np.triu(edge_counts, 1).T

    with np.errstate(invalid="ignore", divide="ignore"):
        q_hat = np.where(pair_counts > 0, edge_counts / pair_counts, 0.0)
    return BlockStats(
        q_hat=symmetrize(q_hat),
        pair_counts=pair_counts,
        p_hat=sizes / sizes.sum(),
        d_hat=2.0 * graph.edge_count / graph.n,
    )


def estimate_R(stats: BlockStats, support: LatentSupport, n: int) -> np.ndarray:
    """Invert the block probabilities through the support's moment identity.

    R_hat = (n / sigma_hat) * sum_{k,l} p_k p_l (q_kl - d_hat/n) mu_k mu_l^T,
    which is exact when the q_kl are noiseless.
    """
    sigma_hat = math.sqrt(stats.d_hat * (n - stats.d_hat) / n)
    resid = stats.q_hat - stats.d_hat / n
    w = stats.p_hat[:, None] * stats.p_hat[None, :] * resid
    r_hat = (n / sigma_hat) * (support.mu.T @ w @ support.mu)
    return symmetrize(r_hat)
