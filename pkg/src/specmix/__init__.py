"""Spectral community detection for degree-balanced block models.

The estimator embeds the centered adjacency matrix, models the scaled
eigenvector rows with a Gaussian mixture whose means and covariances carry
the truncation and shrinkage of weak spectral directions, resolves the
eigenbasis ambiguity by maximum likelihood over the commutant of R, and
classifies nodes by posterior probability.
"""

from .align import AlignmentConfig, AlignmentResult, align_mle, candidate_orthogonals
from .baselines import EmGmmFit, KmeansFit, em_gmm, kmeans, uninformed_pipeline
from .config import ExperimentConfig, RealConfig, default_r_grid
from .embed import (
    Embedding,
    make_embedding,
    normalized_matvec,
    scale_eigenvectors,
    spectral_embedding,
)
from .estimate import BlockStats, estimate_block_stats, estimate_R
from .io_data import load_edge_list, load_labels_and_merge, write_edge_list
from .linalg import (
    ConvergenceError,
    EigenDecomposition,
    SymmetricOperator,
    jacobi_eigh,
    lanczos_topk,
    spectral_map,
    symmetrize,
)
from .metrics import MiscResult, confusion_matrix, min_cost_assignment, misclustering
from .mixture import (
    GmmSpec,
    NoiseCoefficients,
    PosteriorMatrix,
    build_gmm,
    log_density,
    nu,
    posterior,
    posterior_matrix,
    sigma_tilde,
    sigma_trunc,
)
from .model import (
    LatentSupport,
    SbmParams,
    SparseGraph,
    block_probabilities,
    construct_latent_support,
    sample_graph,
    validate_model,
)
from .pipeline import ClusterResult, cluster_embedding, cluster_graph
from .realdata import run_real
from .rng import derive_seed, stream
from .sweep import ResultRow, aggregate_results, read_csv, run_sweep

__version__ = "0.1.0"
