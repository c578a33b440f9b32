"""Score functions over image and text embeddings.

The central object is the cross-alignment matrix S with S[i][j] the cosine
between patch embedding i and description embedding j. The weighted score
contracts it with softmax weights on both sides:

    score = sum_i sum_j w_i * v_j * S[i][j]

where w comes from patch-to-whole-image cosines and v from
description-to-label-prompt cosines. Because S is built from normalized
vectors, the same score factors exactly into an inner product of two
augmented embeddings (the norm-scaled weighted sums of patches and of
descriptions), which is the fast path used for batch evaluation. Plain
mean and max aggregation of S, the whole-image description mean, and a
lambda blend of whole-image and patch scores round out the family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, DomainError
from .vecmath import cosine, cosine_rows, softmax

__all__ = [
    "CrossAlignMatrix",
    "clip_score",
    "llm_score",
    "cross_matrix",
    "patch_weights",
    "desc_weights",
    "wca_score",
    "avg_score",
    "max_score",
    "augmented_image_embedding",
    "augmented_text_embedding",
    "mixed_score",
]


@dataclass(frozen=True)
class CrossAlignMatrix:
    """An N x M cosine matrix with its row and column weight vectors."""

    sims: np.ndarray
    patch_weights: np.ndarray
    desc_weights: np.ndarray

    def __post_init__(self):
        n, m = self.sims.shape
        if self.patch_weights.shape != (n,) or self.desc_weights.shape != (m,):
            raise DimensionError(
                f"weights ({self.patch_weights.shape}, {self.desc_weights.shape}) "
                f"do not match matrix shape {self.sims.shape}"
            )

    def score(self) -> float:
        return wca_score(self.sims, self.patch_weights, self.desc_weights)


def _rows(embs, name: str) -> np.ndarray:
    a = np.asarray(embs, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a nonempty sequence of vectors, got shape {a.shape}")
    return a


def clip_score(img_emb, label_emb) -> float:
    """Cosine similarity of one image embedding and one text embedding."""
    return cosine(img_emb, label_emb)


def llm_score(img_emb, desc_embs) -> float:
    """Unweighted mean cosine of an image against a description set."""
    descs = _rows(desc_embs, "desc_embs")
    return float(np.mean(cosine_rows(descs, img_emb)))


def cross_matrix(patch_embs, desc_embs) -> np.ndarray:
    """Pairwise cosine matrix between patch and description embeddings."""
    patches = _rows(patch_embs, "patch_embs")
    descs = _rows(desc_embs, "desc_embs")
    if patches.shape[1] != descs.shape[1]:
        raise DimensionError(
            f"dimension mismatch: patches d={patches.shape[1]}, descriptions d={descs.shape[1]}"
        )
    p_norms = np.linalg.norm(patches, axis=1)
    d_norms = np.linalg.norm(descs, axis=1)
    if np.any(p_norms == 0.0) or np.any(d_norms == 0.0):
        raise DomainError("cross_matrix inputs contain a zero vector")
    sims = (patches / p_norms[:, None]) @ (descs / d_norms[:, None]).T
    return np.clip(sims, -1.0, 1.0)


def patch_weights(img_emb, patch_embs) -> np.ndarray:
    """Softmax over whole-image-to-patch cosines."""
    patches = _rows(patch_embs, "patch_embs")
    return softmax(cosine_rows(patches, img_emb))


def desc_weights(label_emb, desc_embs) -> np.ndarray:
    """Softmax over label-prompt-to-description cosines."""
    descs = _rows(desc_embs, "desc_embs")
    return softmax(cosine_rows(descs, label_emb))


def _check_weights(weights, length: int, name: str) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (length,):
        raise DimensionError(f"{name} has shape {w.shape}, expected ({length},)")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-6:
        raise DomainError(f"{name} must be nonnegative and sum to 1")
    return w


def wca_score(matrix, w, v) -> float:
    """Doubly weighted sum over the cross-alignment matrix."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"matrix must be nonempty 2-D, got shape {m.shape}")
    w = _check_weights(w, m.shape[0], "patch weights")
    v = _check_weights(v, m.shape[1], "description weights")
    return float(w @ m @ v)


def avg_score(matrix) -> float:
    """Plain mean of the matrix entries."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.size == 0:
        raise DomainError("avg_score requires a nonempty matrix")
    return float(m.mean())


def max_score(matrix) -> float:
    """Largest matrix entry."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.size == 0:
        raise DomainError("max_score requires a nonempty matrix")
    return float(m.max())


def _augmented(embs, weights, name: str) -> np.ndarray:
    rows = _rows(embs, name)
    w = _check_weights(weights, rows.shape[0], f"{name} weights")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms == 0.0):
        raise DomainError(f"{name} contain a zero vector")
    return (w / norms) @ rows


def augmented_image_embedding(patch_embs, w) -> np.ndarray:
    """Weight-scaled sum of unit patch embeddings; pairs with the text side
    so that their inner product reproduces the weighted matrix score exactly."""
    return _augmented(patch_embs, w, "patch_embs")


def augmented_text_embedding(desc_embs, v) -> np.ndarray:
    """Text-side counterpart of :func:`augmented_image_embedding`."""
    return _augmented(desc_embs, v, "desc_embs")


def mixed_score(lam: float, whole_img_score: float, patch_score: float) -> float:
    """Blend of a whole-image score and a patch-aggregated score."""
    if not (0.0 <= lam <= 1.0):
        raise ConfigError(f"lambda must lie in [0, 1], got {lam}")
    return lam * whole_img_score + (1.0 - lam) * patch_score
