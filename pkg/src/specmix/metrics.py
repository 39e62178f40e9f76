"""Permutation-matched misclustering rate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

__all__ = [
    "MiscResult",
    "min_cost_assignment",
    "confusion_matrix",
    "misclustering",
]


@dataclass(frozen=True)
class MiscResult:
    rate: float
    permutation: np.ndarray  # permutation[k] = matched true label for estimate k
    matched_correct: int


def min_cost_assignment(cost: np.ndarray) -> np.ndarray:
    """Permutation minimizing sum_k cost[k, perm[k]].

    Ties break toward the lexicographically smallest permutation: the optimal
    value comes from the Hungarian solver, then columns are chosen greedily,
    smallest first, keeping the optimal completion feasible.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix must be finite")
    kk = cost.shape[0]
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    best = float(cost[rows, cols].sum())
    atol = 1e-9 * (1.0 + abs(best))

    perm = np.empty(kk, dtype=np.int64)
    remaining = list(range(kk))
    partial = 0.0
    for k in range(kk):
        for c in remaining:
            tail_rows = np.arange(k + 1, kk)
            tail_cols = [x for x in remaining if x != c]
            tail = 0.0
            if tail_rows.size:
                sub = cost[np.ix_(tail_rows, tail_cols)]
                r2, c2 = scipy.optimize.linear_sum_assignment(sub)
                tail = float(sub[r2, c2].sum())
            if partial + cost[k, c] + tail <= best + atol:
                perm[k] = c
                partial += cost[k, c]
                remaining.remove(c)
                break
        else:  # pragma: no cover - defensive
            raise RuntimeError("assignment extraction failed")
    return perm


def confusion_matrix(est: np.ndarray, truth: np.ndarray, kk: int) -> np.ndarray:
    """counts[a, b] = #{i : est_i = a, truth_i = b}."""
    est = np.asarray(est, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if est.shape != truth.shape:
        raise ValueError("label vectors must have equal length")
    if est.size and (
        est.min() < 0 or est.max() >= kk or truth.min() < 0 or truth.max() >= kk
    ):
        raise ValueError(f"labels must lie in [0, {kk})")
    return np.bincount(est * kk + truth, minlength=kk * kk).reshape(kk, kk)


def misclustering(
    est: np.ndarray,
    truth: np.ndarray,
    kk: int,
    exclude: np.ndarray | None = None,
) -> MiscResult:
    """Misclustering rate minimized over relabelings of the estimate.

    ``exclude`` drops a node subset from the score (used when part of the
    graph supplied the supervision).
    """
    est = np.asarray(est, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if est.shape != truth.shape:
        raise ValueError("label vectors must have equal length")
    if exclude is not None:
        mask = np.ones(est.size, dtype=bool)
        mask[np.asarray(exclude, dtype=np.int64)] = False
        est, truth = est[mask], truth[mask]
    n = est.size
    counts = confusion_matrix(est, truth, kk)
    perm = min_cost_assignment(counts.max() - counts)
    matched = int(counts[np.arange(kk), perm].sum())
    rate = 1.0 - matched / n if n else float("nan")
    return MiscResult(rate=rate, permutation=perm, matched_correct=matched)
