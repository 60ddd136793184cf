"""Random flip and color jitter for UV textures."""
from __future__ import annotations

import numpy as np
from matplotlib.colors import hsv_to_rgb, rgb_to_hsv

_LUMA = np.array([0.299, 0.587, 0.114])


def augment_uv(texture: np.ndarray, rng: np.random.Generator, flip_prob: float = 0.5,
               brightness: float = 0.2, contrast: float = 0.2, saturation: float = 0.2,
               hue: float = 0.05) -> np.ndarray:
    """Return a randomly flipped and color-jittered copy of an (H, W, 3) texture.

    Steps, in order: left-right flip with ``flip_prob``; additive brightness
    shift in ``[-brightness, brightness]``; contrast scale in
    ``[1 - contrast, 1 + contrast]`` about the texture's mean gray level;
    saturation scale in ``[1 - saturation, 1 + saturation]`` about each
    texel's gray level; hue rotation by ``[-hue, hue]`` turns in HSV. Five
    variates are always drawn, so the rng advances identically whatever the
    ranges are.
    """
    flip, b, c, s, h = rng.random(5)
    out = np.array(texture, dtype=float)
    if flip < flip_prob:
        out = out[:, ::-1].copy()
    out += (2 * b - 1) * brightness
    gray = out @ _LUMA
    cf = 1 + (2 * c - 1) * contrast
    out = (out - gray.mean()) * cf + gray.mean()
    gray = (out @ _LUMA)[..., None]
    sf = 1 + (2 * s - 1) * saturation
    out = (out - gray) * sf + gray
    shift = (2 * h - 1) * hue
    if shift != 0:
        hsv = rgb_to_hsv(np.clip(out, 0, 1))
        hsv[..., 0] = (hsv[..., 0] + shift) % 1.0
        out = hsv_to_rgb(hsv)
    return out
