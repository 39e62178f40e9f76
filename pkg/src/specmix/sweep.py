"""Deterministic simulation sweep over the (r1~, r2~) grid."""

from __future__ import annotations

import csv
import io
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .align import candidate_orthogonals
from .baselines import uninformed_from_embedding
from .config import ExperimentConfig
from .embed import make_embedding
from .metrics import misclustering
from .model import sample_graph, validate_model
from .pipeline import cluster_embedding
from .rng import derive_seed

__all__ = [
    "ResultRow",
    "CSV_HEADER",
    "run_sweep",
    "write_csv",
    "read_csv",
    "aggregate_results",
]

log = logging.getLogger("specmix.sweep")

CSV_HEADER = (
    "r1_tilde,r2_tilde,rep,seed,method,misclustering,align_loglik,"
    "wall_seconds,config_hash"
)


@dataclass(frozen=True)
class ResultRow:
    r1_tilde: float
    r2_tilde: float
    rep: int
    seed: int
    method: str
    misclustering: float | None  # None marks a per-rep failure
    align_loglik: float | None
    wall_seconds: float
    config_hash: str

    @property
    def failed(self) -> bool:
        return self.misclustering is None


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_csv(rows: list[ResultRow], fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in rows:
        misc = "ERROR" if r.failed else repr(float(r.misclustering))
        fh.write(
            f"{r.r1_tilde!r},{r.r2_tilde!r},{r.rep},{r.seed},{r.method},"
            f"{misc},{_fmt(r.align_loglik)},{r.wall_seconds!r},{r.config_hash}\n"
        )


def read_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = CSV_HEADER.split(",")
        if reader.fieldnames != expected:
            raise ValueError(
                f"{path}: expected header {CSV_HEADER!r}, got {reader.fieldnames}"
            )
        for rec in reader:
            try:
                rows.append(
                    ResultRow(
                        r1_tilde=float(rec["r1_tilde"]),
                        r2_tilde=float(rec["r2_tilde"]),
                        rep=int(rec["rep"]),
                        seed=int(rec["seed"]),
                        method=rec["method"],
                        misclustering=(
                            None
                            if rec["misclustering"] == "ERROR"
                            else float(rec["misclustering"])
                        ),
                        align_loglik=(
                            float(rec["align_loglik"]) if rec["align_loglik"] else None
                        ),
                        wall_seconds=float(rec["wall_seconds"]),
                        config_hash=rec["config_hash"],
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}: malformed row {rec}: {exc}") from exc
    return rows


def _run_replicate(config: ExperimentConfig, point_index: int, rep: int) -> list[ResultRow]:
    """Sample one network, embed once, run every requested method on it."""
    r1, r2 = config.r_grid[point_index]
    rep_seed = derive_seed(config.base_seed, point_index, rep)
    chash = config.config_hash()
    support = config.support()
    params = config.params_at(r1, r2)
    kk = params.n_communities

    def row(method, misc, loglik, secs):
        return ResultRow(
            r1_tilde=r1,
            r2_tilde=r2,
            rep=rep,
            seed=rep_seed,
            method=method,
            misclustering=misc,
            align_loglik=loglik,
            wall_seconds=secs,
            config_hash=chash,
        )

    rows = []
    try:
        graph, truth = sample_graph(params, support, seed=derive_seed(rep_seed, "graph"))
        emb = make_embedding(
            graph,
            params.d,
            params.r_eigs.values,
            seed=derive_seed(rep_seed, "embed"),
            tol=config.lanczos_tol,
            max_iter=config.lanczos_max_iter,
        )
    except Exception:
        log.exception("replicate (point=%d, rep=%d) failed before methods", point_index, rep)
        return [row(m, None, None, 1e-9) for m in sorted(config.methods)]

    candidates = None
    uninformed = {}
    for method in sorted(config.methods):
        t0 = time.perf_counter()
        try:
            if method in ("gmm", "low_noise_gmm"):
                if candidates is None:
                    candidates = candidate_orthogonals(params.R, config.alignment)
                mode = "proposed" if method == "gmm" else "low_noise"
                res = cluster_embedding(
                    emb.y,
                    params,
                    support,
                    mode,
                    align_config=config.alignment,
                    covariance_root=config.covariance_root,
                    subsample=config.subsample,
                    seed=derive_seed(rep_seed, method),
                    candidates=candidates,
                )
                labels, loglik = res.labels, res.alignment.log_likelihood
            else:
                if not uninformed:
                    em_labels, km_labels = uninformed_from_embedding(
                        emb.vectors, kk, seed=derive_seed(rep_seed, "uninformed")
                    )
                    uninformed = {"uninformed_gmm": em_labels, "kmeans": km_labels}
                labels, loglik = uninformed[method], None
            misc = misclustering(labels, truth, kk).rate
            rows.append(row(method, misc, loglik, time.perf_counter() - t0))
        except Exception:
            log.exception(
                "method %s failed (point=%d, rep=%d)", method, point_index, rep
            )
            rows.append(row(method, None, None, time.perf_counter() - t0))
    return rows


def run_sweep(
    config: ExperimentConfig, threads: int = 1, out_csv=None
) -> list[ResultRow]:
    """Run every (grid point, rep, method) and return rows sorted by
    (grid point, rep, method); write CSV when a path is given.

    Replicates use independently derived seeds, so any thread count produces
    identical rows. Invalid grid points are skipped with a logged reason.
    """
    valid_points = []
    support = config.support()
    for i, (r1, r2) in enumerate(config.r_grid):
        report = validate_model(config.params_at(r1, r2), support)
        if report.ok:
            valid_points.append(i)
        else:
            log.warning(
                "skipping grid point (%s, %s): invalid model %s", r1, r2, report.violations
            )
    tasks = [(i, rep) for i in valid_points for rep in range(config.reps)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = pool.map(
                _run_replicate_star,
                [(config, i, rep) for i, rep in tasks],
                chunksize=max(1, len(tasks) // (4 * threads)),
            )
            rows = [r for chunk in chunks for r in chunk]
    else:
        rows = [r for i, rep in tasks for r in _run_replicate(config, i, rep)]

    point_order = {pair: i for i, pair in enumerate(config.r_grid)}
    rows.sort(key=lambda r: (point_order[(r.r1_tilde, r.r2_tilde)], r.rep, r.method))
    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            write_csv(rows, fh)
    return rows


def _run_replicate_star(args):
    return _run_replicate(*args)


def rows_to_csv_bytes(rows: list[ResultRow]) -> bytes:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue().encode()


def aggregate_results(rows: list[ResultRow]) -> dict:
    """Mean and standard error of misclustering per (r1~, r2~, method).

    Failed rows are excluded; the failure count is reported per cell.
    """
    cells: dict[tuple, list[float]] = {}
    failures: dict[tuple, int] = {}
    for r in rows:
        key = (r.r1_tilde, r.r2_tilde, r.method)
        if r.failed:
            failures[key] = failures.get(key, 0) + 1
        else:
            cells.setdefault(key, []).append(r.misclustering)
    out = {}
    for key, vals in sorted(cells.items()):
        arr = np.asarray(vals)
        se = arr.std(ddof=1) / np.sqrt(arr.size) if arr.size > 1 else 0.0
        out[key] = {
            "mean": float(arr.mean()),
            "stderr": float(se),
            "count": int(arr.size),
            "failures": failures.get(key, 0),
        }
    return out
