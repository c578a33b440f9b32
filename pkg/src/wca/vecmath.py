"""Dimension-generic vector kernels: cosine similarity, normalization, softmax.

All arithmetic is in float64. Inputs may be any sequence of reals; they are
converted once on entry. Embedding files store float32 payloads, which are
widened before they reach these functions.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DomainError

__all__ = ["as_vector", "cosine", "normalize", "softmax", "cosine_rows"]


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Convert to a 1-D float64 array and validate finiteness and dim >= 1."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if v.size < 1:
        raise DomainError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} contains non-finite values")
    return v


def normalize(v) -> np.ndarray:
    """Scale a vector to unit Euclidean norm.

    Raises DomainError on a zero vector. Idempotent up to rounding.
    Divides by the peak magnitude first so entries near the subnormal
    range neither underflow to a false zero nor lose precision when
    squared.
    """
    v = as_vector(v)
    peak = float(np.max(np.abs(v)))
    if peak == 0.0:
        raise DomainError("cannot normalize a zero vector")
    scaled = v / peak
    return scaled / float(np.linalg.norm(scaled))


def cosine(u, v) -> float:
    """Cosine similarity of two vectors, clamped to [-1, 1].

    Computed as the dot product of the unit-normalized inputs, which makes
    the result invariant to positive rescaling of either argument.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.shape[0] != v.shape[0]:
        raise DimensionError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    value = float(np.dot(normalize(u), normalize(v)))
    return min(1.0, max(-1.0, value))


def cosine_rows(rows: np.ndarray, v) -> np.ndarray:
    """Cosine similarity of each row of a matrix against one vector.

    Batch form of :func:`cosine` used by the scoring layer; same zero-norm
    and dimension rules, same clamping.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError(f"rows must be 2-D, got shape {rows.shape}")
    v = as_vector(v, "v")
    if rows.shape[1] != v.shape[0]:
        raise DimensionError(f"dimension mismatch: {rows.shape[1]} vs {v.shape[0]}")
    if not np.all(np.isfinite(rows)):
        raise DomainError("rows contain non-finite values")
    peaks = np.max(np.abs(rows), axis=1)
    if np.any(peaks == 0.0):
        raise DomainError("rows contain a zero vector")
    scaled = rows / peaks[:, None]
    sims = (scaled / np.linalg.norm(scaled, axis=1)[:, None]) @ normalize(v)
    return np.clip(sims, -1.0, 1.0)


def softmax(scores) -> np.ndarray:
    """Exponential weights on the probability simplex.

    No temperature: raw scores are exponentiated after max-subtraction for
    numerical stability. Larger scores receive strictly larger weights.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise DomainError("softmax requires a nonempty 1-D score sequence")
    if not np.all(np.isfinite(s)):
        raise DomainError("softmax scores must be finite")
    e = np.exp(s - np.max(s))
    return e / e.sum()
