"""Seed derivation and random streams.

All randomness in the package flows through counter-based Philox generators.
Independent streams are derived by hashing a base seed together with a path of
integer or string components (e.g. ``derive_seed(base, point_index, rep)`` for
one sweep replicate, then ``derive_seed(rep_seed, "graph")`` for its graph
sample). The derivation is SHA-256 based, so the same (base seed, path) pair
yields the same stream on any machine.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "stream"]


def derive_seed(base_seed: int, *path: int | str) -> int:
    """Hash ``(base_seed, *path)`` into a 63-bit stream seed."""
    h = hashlib.sha256()
    h.update(str(int(base_seed)).encode())
    for part in path:
        h.update(b"/")
        if isinstance(part, str):
            h.update(b"s:" + part.encode())
        else:
            h.update(b"i:" + str(int(part)).encode())
    return int.from_bytes(h.digest()[:8], "big") >> 1


def stream(seed: int, *path: int | str) -> np.random.Generator:
    """Philox generator for ``seed``, optionally forked along ``path``."""
    if path:
        seed = derive_seed(seed, *path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
