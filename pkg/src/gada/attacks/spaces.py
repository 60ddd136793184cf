"""Search-space adapters: map a search point to a query image and its perturbation norm."""
from __future__ import annotations

import numpy as np
from scipy import sparse

from ..errors import NoFace
from ..facemodel import AlignmentParams, FaceModel, reconstruct_vertices
from ..renderer import (RasterState, bilinear_weights, extract_uv_texture, rasterize,
                        uv_to_texel)

FACE_CLIP = (0.2, 0.8)


class SearchSpace:
    """Common interface; subclasses implement ``_image``.

    Norms are always measured in image space: ``||to_image(p) - x_a||_2``.
    """

    kind = "abstract"

    def __init__(self, x_a: np.ndarray, dims: tuple[int, ...], clip_rule: bool):
        self.x_a = np.asarray(x_a, dtype=float)
        self.dims = tuple(dims)
        self.clip_rule = bool(clip_rule)

    def zero(self) -> np.ndarray:
        return np.zeros(self.dims)

    def to_image(self, point: np.ndarray) -> np.ndarray:
        return self._image(point)

    def norm(self, point: np.ndarray) -> float:
        return self.render(point)[1]

    def render(self, point: np.ndarray) -> tuple[np.ndarray, float]:
        img = self._image(point)
        d = (img - self.x_a).ravel()
        return img, float(np.sqrt(d @ d))

    def project(self, point: np.ndarray) -> np.ndarray:
        """Canonical representative of ``point`` (identity unless clipping makes parts inert)."""
        return point

    def with_clip_rule(self, clip_rule: bool) -> "SearchSpace":
        raise NotImplementedError


class ImageSpace(SearchSpace):
    """Full-resolution pixel perturbation; ``to_image = clip(x_a + p, 0, 1)``.

    With the clip rule, the whole image (the perturbed area) is clamped to
    [0.2, 0.8].
    """

    kind = "image"

    def __init__(self, x_a: np.ndarray, clip_rule: bool = False):
        super().__init__(x_a, np.shape(x_a), clip_rule)
        self.support_mask = np.ones(self.x_a.shape[:2], dtype=bool)

    def _image(self, point):
        lo, hi = FACE_CLIP if self.clip_rule else (0.0, 1.0)
        return np.clip(self.x_a + point, lo, hi)

    def project(self, point):
        return self._image(point) - self.x_a

    def with_clip_rule(self, clip_rule):
        return ImageSpace(self.x_a, clip_rule)


class UVSpace(SearchSpace):
    """UV-texture perturbation rendered additively onto the face with flat shading.

    The raster, the vertex lookups, and the owner table are computed once at
    construction; each query is a gather plus a clip on face pixels only, so
    background pixels are returned bit-identical to ``x_a``.
    """

    kind = "uv"

    def __init__(self, x_a: np.ndarray, model: FaceModel, verts: np.ndarray, raster: RasterState,
                 uv_dims: tuple[int, int], clip_rule: bool = False):
        super().__init__(x_a, (uv_dims[0], uv_dims[1], 3), clip_rule)
        if not raster.face_mask.any():
            raise NoFace("face mask is empty")
        self.model = model
        self.verts = verts
        self.raster = raster
        self.uv_dims = (int(uv_dims[0]), int(uv_dims[1]))
        self.support_mask = raster.face_mask
        h, w = self.x_a.shape[:2]
        self._pix = np.flatnonzero(raster.face_mask.ravel())
        owners = raster.owner.ravel()[self._pix]
        used, self._slot = np.unique(owners, return_inverse=True)
        texel = uv_to_texel(model.uv_coords[used], *self.uv_dims)
        tidx, tw = bilinear_weights(texel, *self.uv_dims)
        n_tex = self.uv_dims[0] * self.uv_dims[1]
        # texel values -> colors of the used vertices, and -> face pixels (owner lookup folded in)
        self._vmap = sparse.csr_matrix((tw.ravel(), (np.repeat(np.arange(len(used)), 4), tidx.ravel())),
                                       shape=(len(used), n_tex))
        self._pmap = self._vmap[self._slot]
        self._face0 = self.x_a.reshape(h * w, -1)[self._pix]

    def vertex_colors(self, point: np.ndarray) -> np.ndarray:
        """Colors of the vertices that own at least one pixel (internal order)."""
        return self._vmap @ np.asarray(point, dtype=float).reshape(-1, 3)

    def _face(self, point):
        lo, hi = FACE_CLIP if self.clip_rule else (0.0, 1.0)
        delta = self._pmap @ np.asarray(point, dtype=float).reshape(-1, 3)
        return np.clip(self._face0 + delta, lo, hi)

    def _image(self, point):
        img = self.x_a.copy()
        img.reshape(-1, img.shape[2])[self._pix] = self._face(point)
        return img

    def render(self, point):
        face = self._face(point)
        img = self.x_a.copy()
        img.reshape(-1, img.shape[2])[self._pix] = face
        d = (face - self._face0).ravel()
        return img, float(np.sqrt(d @ d))

    def texture_of(self, image: np.ndarray) -> np.ndarray:
        """UV texture extracted from ``image`` with this space's posed vertices."""
        return extract_uv_texture(self.model, image, self.verts, *self.uv_dims)

    def with_clip_rule(self, clip_rule):
        return UVSpace(self.x_a, self.model, self.verts, self.raster, self.uv_dims, clip_rule)


def make_image_space(x_a: np.ndarray, clip_rule: bool = False) -> ImageSpace:
    return ImageSpace(x_a, clip_rule)


def make_uv_space(x_a: np.ndarray, model: FaceModel, params: AlignmentParams,
                  uv_dims: tuple[int, int] | None = None, clip_rule: bool = False,
                  raster: RasterState | None = None) -> UVSpace:
    """Build the UV adapter for ``x_a``; alignment and z-buffer are computed here, once.

    ``uv_dims`` defaults to the image size. ``clip_rule`` clamps face pixels to
    [0.2, 0.8] (used for dictionary-initialized runs).
    """
    h, w = np.shape(x_a)[:2]
    verts = reconstruct_vertices(model, params)
    if raster is None:
        raster = rasterize(verts, model.triangles, w, h)
    return UVSpace(x_a, model, verts, raster, uv_dims or (h, w), clip_rule)
