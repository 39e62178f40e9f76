"""Gaussian mixture built from model parameters, in two approximations.

The proposed mixture truncates sub-threshold directions of R (component means
get the factor (Rbar^2 - I)^{1/2}, exactly zero where |r| <= 1) and shrinks the
covariance accordingly. The low-noise mixture keeps means R mu_k and covariance
Sigma_tilde, valid only when the spikes are strong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .linalg import jacobi_eigh, spectral_map, symmetrize
from .model import LatentSupport, SbmParams

__all__ = [
    "DegenerateModelError",
    "NoiseCoefficients",
    "GmmSpec",
    "PosteriorMatrix",
    "nu",
    "sigma_tilde",
    "sigma_trunc",
    "build_gmm",
    "log_density",
    "posterior",
    "mixture_log_densities",
    "posterior_matrix",
]


class DegenerateModelError(ValueError):
    """The mixture carries no usable signal dimension."""


@dataclass(frozen=True)
class NoiseCoefficients:
    """Coefficients of the variance correction
    nu(x, xt) = 1 + lin * x^T R xt - quad * (x^T R xt)^2."""

    lin: float   # (n - 2d) / (n sigma)
    quad: float  # 1 / n

    @classmethod
    def from_params(cls, params: SbmParams) -> "NoiseCoefficients":
        return cls(
            lin=(params.n - 2.0 * params.d) / (params.n * params.sigma),
            quad=1.0 / params.n,
        )


def nu(x: np.ndarray, xt: np.ndarray, params: SbmParams) -> float:
    """Variance correction for a pair of latent points."""
    c = NoiseCoefficients.from_params(params)
    t = float(np.asarray(x) @ params.R @ np.asarray(xt))
    return 1.0 + c.lin * t - c.quad * t * t


def sigma_tilde(
    x: np.ndarray, support: LatentSupport, params: SbmParams
) -> np.ndarray:
    """Low-noise covariance: sum_k p_k nu(x, mu_k) mu_k mu_k^T."""
    if support.n_components == 0:
        raise ValueError("support is empty")
    c = NoiseCoefficients.from_params(params)
    t = support.mu @ (params.R @ np.asarray(x, dtype=float))
    w = support.p * (1.0 + c.lin * t - c.quad * t * t)
    return symmetrize(np.einsum("k,ki,kj->ij", w, support.mu, support.mu))


def _root_factor(params: SbmParams, covariance_root: str) -> np.ndarray:
    """(I - Rbar^{-2})^{1/2} by default; the reciprocal root when configured,
    with eigenvalue-0 factors mapped to 0."""
    if covariance_root == "positive":
        f = lambda r: math.sqrt(max(1.0 - 1.0 / max(abs(r), 1.0) ** 2, 0.0))
    elif covariance_root == "literal":
        def f(r):
            g = 1.0 - 1.0 / max(abs(r), 1.0) ** 2
            return 1.0 / math.sqrt(g) if g > 0.0 else 0.0
    else:
        raise ValueError(f"unknown covariance_root {covariance_root!r}")
    return spectral_map(params.R, f)


def sigma_trunc(
    x: np.ndarray,
    support: LatentSupport,
    params: SbmParams,
    covariance_root: str = "positive",
) -> np.ndarray:
    """Truncated/shrunk covariance
    F Sigma_tilde(x) F + Rbar^{-1} Runder^2 Rbar^{-1}."""
    f = _root_factor(params, covariance_root)
    noise = spectral_map(
        params.R, lambda r: (min(abs(r), 1.0) / max(abs(r), 1.0)) ** 2
    )
    return symmetrize(f @ sigma_tilde(x, support, params) @ f + noise)


def mean_factor(params: SbmParams) -> np.ndarray:
    """(Rbar^2 - I)^{1/2}: zero on sub-threshold directions, shrinks the rest."""
    return spectral_map(params.R, lambda r: math.sqrt(max(r * r - 1.0, 0.0)))


@dataclass(frozen=True)
class GmmSpec:
    """Mixture weights, component means and covariances."""

    weights: np.ndarray  # (K,)
    means: np.ndarray    # (K, s)
    covs: np.ndarray     # (K, s, s)
    mode: str            # "proposed" | "low_noise"

    def __post_init__(self):
        self.weights.setflags(write=False)
        self.means.setflags(write=False)
        self.covs.setflags(write=False)

    @property
    def n_components(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class PosteriorMatrix:
    """Per-node posterior membership probabilities and their MAP labels."""

    probs: np.ndarray       # (n, K), rows sum to 1
    map_labels: np.ndarray  # (n,), argmax with lowest-index tie-break


def _ridge_covariances(covs: np.ndarray) -> np.ndarray:
    """Add 1e-9*trace/s ridge to any covariance with an eigenvalue below 1e-12."""
    out = covs.copy()
    s = covs.shape[1]
    for k in range(covs.shape[0]):
        tr = float(np.trace(out[k]))
        if tr <= 0.0:
            raise DegenerateModelError(
                "component covariance has no mass in any direction"
            )
        if jacobi_eigh(out[k]).values.min() < 1e-12:
            out[k] = out[k] + (1e-9 * tr / s) * np.eye(s)
    return out


def build_gmm(
    params: SbmParams,
    support: LatentSupport,
    mode: str,
    covariance_root: str = "positive",
) -> GmmSpec:
    """Mixture over the latent support in the requested approximation."""
    if support.degenerate:
        raise DegenerateModelError("latent dimension is zero (single community)")
    if mode == "proposed":
        m = mean_factor(params)
        means = support.mu @ m  # rows (Rbar^2 - I)^{1/2} mu_k (m symmetric)
        covs = np.stack(
            [
                sigma_trunc(mu_k, support, params, covariance_root)
                for mu_k in support.mu
            ]
        )
    elif mode == "low_noise":
        means = support.mu @ params.R
        covs = np.stack([sigma_tilde(mu_k, support, params) for mu_k in support.mu])
    else:
        raise ValueError(f"unknown mixture mode {mode!r}")
    covs = _ridge_covariances(covs)
    return GmmSpec(
        weights=params.p.copy(), means=means, covs=covs, mode=mode
    )


def gaussian_mixture_log_densities(
    weights: np.ndarray, means: np.ndarray, covs: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """(n, K) matrix of log(w_k) + log N(z_i; m_k, C_k)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n, s = z.shape
    kk = weights.size
    out = np.empty((n, kk))
    const = -0.5 * s * math.log(2.0 * math.pi)
    for k in range(kk):
        try:
            chol = scipy.linalg.cholesky(covs[k], lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"component {k} covariance is not positive definite"
            ) from exc
        diff = (z - means[k]).T
        sol = scipy.linalg.solve_triangular(chol, diff, lower=True)
        out[:, k] = (
            math.log(weights[k])
            + const
            - np.log(np.diag(chol)).sum()
            - 0.5 * np.sum(sol * sol, axis=0)
        )
    return out


def mixture_log_densities(gmm: GmmSpec, z: np.ndarray) -> np.ndarray:
    """(n,) vector of log-marginal densities via log-sum-exp over components."""
    lp = gaussian_mixture_log_densities(gmm.weights, gmm.means, gmm.covs, z)
    return scipy.special.logsumexp(lp, axis=1)


def log_density(gmm: GmmSpec, z: np.ndarray) -> float:
    """Log marginal density of the mixture at a single point."""
    return float(mixture_log_densities(gmm, np.atleast_2d(z))[0])


def posterior_matrix(gmm: GmmSpec, z: np.ndarray) -> PosteriorMatrix:
    """Posterior membership probabilities row-wise, with MAP labels."""
    lp = gaussian_mixture_log_densities(gmm.weights, gmm.means, gmm.covs, z)
    lp = lp - lp.max(axis=1, keepdims=True)
    probs = np.exp(lp)
    probs /= probs.sum(axis=1, keepdims=True)
    return PosteriorMatrix(probs=probs, map_labels=np.argmax(probs, axis=1))


def posterior(gmm: GmmSpec, z: np.ndarray) -> tuple[np.ndarray, int]:
    """Posterior probability vector and MAP label for a single point."""
    pm = posterior_matrix(gmm, np.atleast_2d(z))
    return pm.probs[0], int(pm.map_labels[0])
