"""End-to-end clustering: embed, align, posterior.

The proposed method and its low-noise variant differ only in the mixture
handed to the aligner, so both run through ``cluster_embedding``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import AlignmentConfig, AlignmentResult, align_mle, candidate_orthogonals
from .embed import Embedding, make_embedding
from .mixture import GmmSpec, PosteriorMatrix, build_gmm, posterior_matrix
from .model import LatentSupport, SbmParams, SparseGraph
from .rng import derive_seed

__all__ = ["ClusterResult", "cluster_embedding", "cluster_graph"]


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    posterior: PosteriorMatrix
    alignment: AlignmentResult
    gmm: GmmSpec


def cluster_embedding(
    y: np.ndarray,
    params: SbmParams,
    support: LatentSupport,
    mode: str,
    align_config: AlignmentConfig = AlignmentConfig(),
    covariance_root: str = "positive",
    subsample: int | None = None,
    seed: int = 0,
    candidates: list[np.ndarray] | None = None,
) -> ClusterResult:
    """Align precomputed scaled rows against the model mixture and classify."""
    gmm = build_gmm(params, support, mode, covariance_root=covariance_root)
    if candidates is None:
        candidates = candidate_orthogonals(params.R, align_config)
    alignment = align_mle(
        gmm, y, candidates, subsample=subsample, seed=derive_seed(seed, "align")
    )
    post = posterior_matrix(gmm, y @ alignment.u_star.T)
    return ClusterResult(
        labels=post.map_labels, posterior=post, alignment=alignment, gmm=gmm
    )


def cluster_graph(
    graph: SparseGraph,
    params: SbmParams,
    support: LatentSupport,
    mode: str = "proposed",
    align_config: AlignmentConfig = AlignmentConfig(),
    covariance_root: str = "positive",
    subsample: int | None = None,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> tuple[ClusterResult, Embedding]:
    """Full pipeline from a graph: spectral embedding, alignment, posterior."""
    emb = make_embedding(
        graph,
        params.d,
        params.r_eigs.values,
        seed=derive_seed(seed, "embed"),
        tol=tol,
        max_iter=max_iter,
    )
    result = cluster_embedding(
        emb.y,
        params,
        support,
        mode,
        align_config=align_config,
        covariance_root=covariance_root,
        subsample=subsample,
        seed=seed,
    )
    return result, emb
