"""Deterministic seed derivation and RNG streams.

Every random decision in the framework draws from a stream identified by a
seed path such as ``(master, repetition, "mobility", user)``.  Paths are
hashed with SHA-256 (never Python's randomized ``hash``), so streams are
stable across processes and independent of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEED_BYTES = 8


def derive_seed(*parts: int | str) -> int:
    """Map a seed path to a stable 64-bit integer seed."""
    if not parts:
        raise ValueError("seed path must be non-empty")
    text = "/".join(_token(p) for p in parts)
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:_SEED_BYTES], "big", signed=False)


def stream(*parts: int | str) -> np.random.Generator:
    """Return an independent PCG64 generator for the given seed path."""
    return np.random.default_rng(derive_seed(*parts))


def _token(part: int | str) -> str:
    if isinstance(part, bool):
        raise TypeError("bool is not a valid seed path component")
    if isinstance(part, (int, np.integer)):
        return f"i{int(part)}"
    if isinstance(part, str):
        if "/" in part:
            raise ValueError(f"seed path component may not contain '/': {part!r}")
        return f"s{part}"
    raise TypeError(f"unsupported seed path component: {part!r}")
