"""Embedding sources behind one interface.

The engine never runs a neural network on its required path: the default
backend is a file-backed :class:`~wca.wem.PrecomputedStore`. A synthetic
linear encoder supports the misalignment theorem lab, and ``DemoEncoder``
is a deterministic stand-in for a real model runtime so raw-image commands
(bench, classify on pixels) work without any ML dependency.

A backend must expose ``dim``, ``encode_image``, ``encode_text`` and a
``thread_safe`` flag. If ``thread_safe`` is false the evaluation harness
serializes calls to it.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .errors import DimensionError
from .prompts import ImageBuffer
from .rng import SplitMix64, fnv1a64
from .wem import PrecomputedStore

__all__ = ["EncoderBackend", "LinearEncoder", "DemoEncoder", "PrecomputedStore"]


@runtime_checkable
class EncoderBackend(Protocol):
    dim: int
    thread_safe: bool

    def encode_image(self, image_or_id) -> np.ndarray: ...

    def encode_text(self, text_or_id) -> np.ndarray: ...


class LinearEncoder:
    """Pure linear map x -> A x; the image encoder model of the theorem lab."""

    thread_safe = True

    def __init__(self, matrix):
        a = np.asarray(matrix, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionError(f"encoder matrix must be 2-D, got shape {a.shape}")
        self.matrix = a
        self.dim = a.shape[0]
        self.dim_in = a.shape[1]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim_in,):
            raise DimensionError(
                f"input has shape {x.shape}, encoder expects ({self.dim_in},)"
            )
        return self.matrix @ x

    encode_image = __call__

    def encode_text(self, x) -> np.ndarray:
        return self(x)


class DemoEncoder:
    """Deterministic toy encoder for running the full pipeline on raw inputs.

    Images: block-mean downsample to a grid x 3 channels, centered, unit
    normalized. Texts: character trigrams hashed to seeded Gaussian rows,
    summed and normalized. Not a trained model; useful for timing runs and
    end-to-end demos only.
    """

    thread_safe = True

    def __init__(self, grid: int = 4):
        if grid < 1:
            raise DimensionError("grid must be >= 1")
        self.grid = grid
        self.dim = 3 * grid * grid

    def encode_image(self, image_or_id) -> np.ndarray:
        img = image_or_id
        if not isinstance(img, ImageBuffer):
            raise DimensionError("DemoEncoder.encode_image expects an ImageBuffer")
        g = self.grid
        px = img.pixels.astype(np.float64) / 255.0
        rows = np.array_split(px, g, axis=0)
        feats = np.empty((g, g, 3))
        for r, band in enumerate(rows):
            for c, cell in enumerate(np.array_split(band, g, axis=1)):
                feats[r, c] = cell.mean(axis=(0, 1)) if cell.size else 0.0
        flat = feats.reshape(-1) - 0.5
        norm = np.linalg.norm(flat)
        if norm == 0.0:
            flat = flat + 1.0 / self.dim
            norm = np.linalg.norm(flat)
        return flat / norm

    def encode_text(self, text_or_id) -> np.ndarray:
        text = str(text_or_id).lower()
        padded = f"  {text} "
        acc = np.zeros(self.dim)
        for i in range(len(padded) - 2):
            tri = padded[i : i + 3]
            rng = SplitMix64(fnv1a64(tri.encode("utf-8")))
            row = np.array([rng.u01() - 0.5 for _ in range(self.dim)])
            acc += row
        norm = np.linalg.norm(acc)
        if norm == 0.0:
            acc[0] = 1.0
            norm = 1.0
        return acc / norm
