"""Separable resampling between the reduced search grid and the point grid."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def bilinear_matrix(n_out: int, n_in: int) -> np.ndarray:
    """(n_out, n_in) half-pixel bilinear interpolation matrix with edge clamping."""
    pos = np.clip((np.arange(n_out) + 0.5) * n_in / n_out - 0.5, 0, n_in - 1)
    i0 = np.floor(pos).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    a = pos - i0
    m = np.zeros((n_out, n_in))
    m[np.arange(n_out), i0] += 1 - a
    m[np.arange(n_out), i1] += a
    m.flags.writeable = False
    return m


def upsample_bilinear(z: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Resize an (h, w, C) array to ``shape`` (H, W) bilinearly."""
    h, w, c = z.shape
    my = bilinear_matrix(shape[0], h)
    mx = bilinear_matrix(shape[1], w)
    rows = (my @ z.reshape(h, w * c)).reshape(shape[0], w, c)
    return np.matmul(mx, rows)


@lru_cache(maxsize=64)
def nearest_index(n_out: int, n_in: int) -> np.ndarray:
    idx = (np.arange(n_out) * n_in) // n_out
    idx.flags.writeable = False
    return idx


def upsample_nearest(s: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbour resize of an (h, w, C) array to ``shape`` (H, W)."""
    return s[nearest_index(shape[0], s.shape[0])][:, nearest_index(shape[1], s.shape[1])]
