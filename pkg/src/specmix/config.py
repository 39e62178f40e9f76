"""Experiment configuration: JSON round trip, model construction, hashing."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .align import AlignmentConfig
from .model import LatentSupport, SbmParams, construct_latent_support

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RealConfig",
    "default_r_grid",
    "rotation_matrix",
]

METHODS = ("gmm", "kmeans", "low_noise_gmm", "uninformed_gmm")


class ConfigError(ValueError):
    pass


def default_r_grid(
    r1_values=(1.0, 1.1, 1.2), r2_max: float = 2.6, step: float = 0.2
) -> tuple[tuple[float, float], ...]:
    """Grid (r1~, r2~) with r2~ running from 1.0 to r2_max in the given step."""
    n2 = int(round((r2_max - 1.0) / step)) + 1
    r2_values = [round(1.0 + i * step, 10) for i in range(n2)]
    return tuple((r1, r2) for r1 in r1_values for r2 in r2_values)


def rotation_matrix(spec, s: int) -> np.ndarray:
    """Resolve a rotation spec: 'identity', 'hadamard', {'angle': radians},
    or an explicit orthogonal matrix."""
    if isinstance(spec, str):
        if spec == "identity":
            return np.eye(s)
        if spec == "hadamard":
            if s != 2:
                raise ConfigError("'hadamard' rotation needs latent dimension 2")
            return np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        raise ConfigError(f"unknown rotation {spec!r}")
    if isinstance(spec, dict):
        if set(spec) != {"angle"}:
            raise ConfigError(f"rotation object must have exactly key 'angle': {spec}")
        if s != 2:
            raise ConfigError("angle rotation needs latent dimension 2")
        t = float(spec["angle"])
        return np.array(
            [[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]]
        )
    q = np.asarray(spec, dtype=float)
    if q.shape != (s, s):
        raise ConfigError(f"rotation matrix must be {s}x{s}, got {q.shape}")
    if np.linalg.norm(q.T @ q - np.eye(s)) > 1e-8:
        raise ConfigError("rotation matrix is not orthogonal")
    return q


def _as_tuple(x):
    if isinstance(x, (list, tuple)):
        return tuple(_as_tuple(v) for v in x)
    return x


@dataclass(frozen=True)
class ExperimentConfig:
    """Simulation sweep configuration (JSON keys match the field names)."""

    n: int = 5000
    p: tuple = (0.1, 0.3, 0.6)
    d: float = 15.0
    r_grid: tuple = field(default_factory=default_r_grid)
    rotation: object = "hadamard"
    methods: tuple = METHODS
    reps: int = 100
    base_seed: int = 0
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    covariance_root: str = "positive"
    subsample: int | None = None
    lanczos_tol: float = 1e-8
    lanczos_max_iter: int | None = 1200
    output_csv: str | None = None
    output_plot: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "r_grid", _as_tuple(self.r_grid))
        object.__setattr__(self, "rotation", _as_tuple(self.rotation))
        object.__setattr__(self, "methods", tuple(self.methods))
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown method(s) {sorted(unknown)}; pick from {METHODS}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        if self.covariance_root not in ("positive", "literal"):
            raise ConfigError("covariance_root must be 'positive' or 'literal'")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if not self.r_grid:
            raise ConfigError("r_grid must be non-empty")
        rotation_matrix(self.rotation, len(self.p) - 1)  # fail early

    @property
    def latent_dim(self) -> int:
        return len(self.p) - 1

    def support(self) -> LatentSupport:
        return construct_latent_support(np.asarray(self.p))

    def params_at(self, r1_tilde: float, r2_tilde: float) -> SbmParams:
        """Model for one grid point: R = Q diag(sort desc(r~)) Q^T."""
        r_sorted = np.sort([r1_tilde, r2_tilde])[::-1]
        s = self.latent_dim
        if s != 2:
            raise ConfigError("the (r1~, r2~) grid requires K = 3 communities")
        q = rotation_matrix(self.rotation, s)
        r_mat = (q * r_sorted) @ q.T
        return SbmParams(n=self.n, p=np.asarray(self.p), d=self.d, R=r_mat)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        if "alignment" in data and isinstance(data["alignment"], dict):
            data = dict(data)
            data["alignment"] = AlignmentConfig(**data["alignment"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """Hash of all scientific fields (output paths excluded, so the same
        experiment written elsewhere keeps its identity)."""
        payload = self.to_dict()
        payload.pop("output_csv")
        payload.pop("output_plot")
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class RealConfig:
    """Real-data run configuration."""

    edges: str = "data/email-Eu-core.txt"
    labels: str = "data/email-Eu-core-department-labels.txt"
    keep_largest: int = 2
    mode: str = "oracle"          # "oracle" | "sampled"
    frac: float = 0.1
    samples: int = 20             # labeled subsamples to average over
    kmeans_seeds: int = 20
    kmeans_restarts: int = 50
    base_seed: int = 0
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    covariance_root: str = "positive"
    subsample: int | None = None
    lanczos_tol: float = 1e-8
    lanczos_max_iter: int | None = 1200
    output_report: str | None = None

    def __post_init__(self):
        if self.mode not in ("oracle", "sampled"):
            raise ConfigError("mode must be 'oracle' or 'sampled'")
        if not 0.0 < self.frac <= 1.0:
            raise ConfigError("frac must be in (0, 1]")
        if self.covariance_root not in ("positive", "literal"):
            raise ConfigError("covariance_root must be 'positive' or 'literal'")

    @classmethod
    def from_json(cls, path) -> "RealConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        if "alignment" in data and isinstance(data["alignment"], dict):
            data = dict(data)
            data["alignment"] = AlignmentConfig(**data["alignment"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
