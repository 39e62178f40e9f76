"""Edge-list and label-file ingestion (SNAP plain-text formats)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import SparseGraph

__all__ = [
    "EdgeListParseError",
    "LabelIngestError",
    "load_edge_list",
    "write_edge_list",
    "load_labels_and_merge",
]


class EdgeListParseError(ValueError):
    pass


class LabelIngestError(ValueError):
    pass


def load_edge_list(path) -> tuple[SparseGraph, np.ndarray]:
    """Read whitespace-separated integer pairs into an undirected simple graph.

    '#'-prefixed lines are comments. Direction is collapsed; duplicates and
    self-loops are dropped. Node ids are compacted to 0..n-1 in order of first
    appearance; the original ids come back as the second value.
    """
    ids: dict[int, int] = {}
    us, vs = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListParseError(
                    f"{path}:{lineno}: expected two integers, got {text!r}"
                )
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise EdgeListParseError(
                    f"{path}:{lineno}: expected two integers, got {text!r}"
                ) from exc
            for node in (a, b):
                if node not in ids:
                    ids[node] = len(ids)
            us.append(ids[a])
            vs.append(ids[b])
    n = len(ids)
    graph = SparseGraph.from_edges(
        n, np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)
    )
    node_ids = np.empty(n, dtype=np.int64)
    for original, compact in ids.items():
        node_ids[compact] = original
    return graph, node_ids


def write_edge_list(graph: SparseGraph, path) -> None:
    """One 'u v' line per edge (u < v), using the compact 0..n-1 ids."""
    edges = graph.edge_array()
    with open(path, "w") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def load_labels_and_merge(
    path, keep_largest: int, node_ids: np.ndarray
) -> tuple[np.ndarray, int]:
    """Read 'node_id department_id' lines and merge small departments.

    The keep_largest biggest departments keep labels 0..keep_largest-1
    (descending size; size ties rank the smaller original department id
    first); every other department maps to label keep_largest. Every graph
    node must be labeled.
    """
    raw: dict[int, int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise LabelIngestError(
                    f"{path}:{lineno}: expected 'node_id department_id', got {text!r}"
                )
            try:
                node, dept = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise LabelIngestError(
                    f"{path}:{lineno}: expected 'node_id department_id', got {text!r}"
                ) from exc
            raw[node] = dept

    index_of = {int(orig): i for i, orig in enumerate(node_ids)}
    unknown = sorted(set(raw) - set(index_of))
    if unknown:
        raise LabelIngestError(
            f"label file references node(s) not in the graph: {unknown[:5]}"
        )
    missing = sorted(set(index_of) - set(raw))
    if missing:
        raise LabelIngestError(
            f"graph node(s) without a label: {missing[:5]}"
        )

    departments: dict[int, int] = {}
    for orig, dept in raw.items():
        departments[dept] = departments.get(dept, 0) + 1
    ranked = sorted(departments, key=lambda dep: (-departments[dep], dep))
    kept = ranked[: max(keep_largest, 0)]
    relabel = {dep: i for i, dep in enumerate(kept)}
    merged_any = len(ranked) > len(kept)
    kk = len(kept) + (1 if merged_any else 0)

    labels = np.empty(len(index_of), dtype=np.int64)
    for orig, dept in raw.items():
        labels[index_of[orig]] = relabel.get(dept, len(kept))
    return labels, kk
