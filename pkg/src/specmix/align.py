"""Eigenbasis alignment by maximum mixture likelihood.

The eigenvectors of the adjacency matrix are determined only up to an
orthogonal transform commuting with the spectrum of R. Candidates are
enumerated block-wise over that commutant and scored by the mixture
log-likelihood of the rotated rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import jacobi_eigh, symmetrize
from .mixture import GmmSpec, mixture_log_densities
from .rng import stream

__all__ = [
    "AlignmentConfig",
    "AlignmentResult",
    "candidate_orthogonals",
    "align_mle",
]


@dataclass(frozen=True)
class AlignmentConfig:
    angle_grid: int = 64        # rotations per 2x2 degenerate block
    random_per_block: int = 256  # Haar samples per block of size >= 3
    gap_tol: float = 1e-6       # relative gap for grouping equal eigenvalues
    seed: int = 0


@dataclass(frozen=True)
class AlignmentResult:
    u_star: np.ndarray
    log_likelihood: float
    candidate_index: int
    per_candidate_loglik: np.ndarray


def _eigenvalue_blocks(values: np.ndarray, gap_tol: float) -> list[slice]:
    """Group (sorted) eigenvalues into blocks of equal value up to gap_tol."""
    blocks = []
    start = 0
    for i in range(1, values.size):
        gap = abs(values[i] - values[i - 1])
        if gap > gap_tol * max(1.0, abs(values[i]), abs(values[i - 1])):
            blocks.append(slice(start, i))
            start = i
    blocks.append(slice(start, values.size))
    return blocks


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _haar_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _block_options(size: int, index: int, config: AlignmentConfig) -> list[np.ndarray]:
    if size == 1:
        return [np.array([[1.0]]), np.array([[-1.0]])]
    if size == 2:
        reflect = np.diag([1.0, -1.0])
        angles = 2.0 * np.pi * np.arange(config.angle_grid) / config.angle_grid
        opts = [_rotation(t) for t in angles]
        opts += [_rotation(t) @ reflect for t in angles]
        return opts
    rng = stream(config.seed, "candidates", index)
    return [_haar_orthogonal(rng, size) for _ in range(config.random_per_block)]


def candidate_orthogonals(
    r_mat: np.ndarray, config: AlignmentConfig = AlignmentConfig()
) -> list[np.ndarray]:
    """Representative set of orthogonal U with U diag(r) U^T = R.

    Eigenvalues are grouped into equal-value blocks; each candidate is
    U_R times a block-diagonal orthogonal matrix: sign flips for simple
    eigenvalues, a rotation/reflection net for 2x2 blocks, seeded Haar
    samples for larger blocks.
    """
    r_mat = symmetrize(r_mat)
    eig = jacobi_eigh(r_mat)
    blocks = _eigenvalue_blocks(eig.values, config.gap_tol)
    per_block = [
        _block_options(b.stop - b.start, i, config) for i, b in enumerate(blocks)
    ]
    candidates = []
    for combo in itertools.product(*per_block):
        b = scipy.linalg.block_diag(*combo)
        u = eig.vectors @ b
        err = np.linalg.norm((u * eig.values) @ u.T - r_mat)
        if err > 1e-8:
            raise AssertionError(
                f"candidate does not reconstruct R (error {err:.2e})"
            )
        candidates.append(u)
    return candidates


def align_mle(
    gmm: GmmSpec,
    y: np.ndarray,
    candidates: list[np.ndarray],
    subsample: int | None = None,
    seed: int = 0,
) -> AlignmentResult:
    """Pick the candidate maximizing sum_i log P0(U y_i).

    Rows may be subsampled (seeded, without replacement). Ties break toward
    the lowest candidate index.
    """
    if not candidates:
        raise ValueError("candidate list is empty")
    y = np.asarray(y, dtype=float)
    rows = y
    if subsample is not None and subsample < y.shape[0]:
        idx = np.sort(
            stream(seed, "align-subsample").choice(
                y.shape[0], size=subsample, replace=False
            )
        )
        rows = y[idx]
    logliks = np.array(
        [mixture_log_densities(gmm, rows @ u.T).sum() for u in candidates]
    )
    best = int(np.argmax(logliks))
    return AlignmentResult(
        u_star=candidates[best],
        log_likelihood=float(logliks[best]),
        candidate_index=best,
        per_candidate_loglik=logliks,
    )
