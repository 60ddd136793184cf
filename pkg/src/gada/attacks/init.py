"""Starting points for dodging and impersonation runs."""
from __future__ import annotations

import numpy as np

from ..errors import InitFailed
from ..renderer import extract_uv_texture
from .augment import augment_uv
from .spaces import SearchSpace, UVSpace

IMPERSONATION_ATTEMPTS = 200


def init_dodging(space: SearchSpace, oracle, rng: np.random.Generator,
                 max_resamples: int = 50) -> np.ndarray:
    """Uniform-noise start: the face (UV) or the whole image (pixels) becomes U(0, 1).

    The original content is subtracted because rendering is additive. Each
    sample costs one query; raises InitFailed after ``max_resamples``.
    """
    if isinstance(space, UVSpace):
        base = space.texture_of(space.x_a)
    else:
        base = space.x_a
    for _ in range(max_resamples):
        point = space.project(rng.random(space.dims) - base)
        if oracle.is_adversarial(oracle.verify_clean(space.to_image(point))):
            return point
    raise InitFailed(f"no adversarial sample in {max_resamples} draws")


def init_impersonation(space: UVSpace, source_image: np.ndarray, source_verts: np.ndarray,
                       oracle, rng: np.random.Generator,
                       max_attempts: int = IMPERSONATION_ATTEMPTS) -> np.ndarray | None:
    """Face swap: paint the source face's texture over the attacked image's face.

    The first attempt uses the source texture as extracted; later attempts
    jitter it with ``augment_uv``. Returns ``None`` after ``max_attempts``
    rejected queries so the caller can fall back to the pixel-space start.
    """
    target_tex = space.texture_of(space.x_a)
    source_tex = extract_uv_texture(space.model, source_image, source_verts, *space.uv_dims)
    for attempt in range(max_attempts):
        tex = source_tex if attempt == 0 else augment_uv(source_tex, rng)
        point = tex - target_tex
        if oracle.is_adversarial(oracle.verify_clean(space.to_image(point))):
            return point
    return None


def init_impersonation_image(space: SearchSpace, source_image: np.ndarray, oracle) -> np.ndarray:
    """Pixel-space impersonation start: the source image itself (one query)."""
    point = space.project(np.asarray(source_image, dtype=float) - space.x_a)
    if oracle.is_adversarial(oracle.verify_clean(space.to_image(point))):
        return point
    raise InitFailed("source image is not accepted as the target identity")
