"""Software rasterizer and UV/vertex-color/image conversions.

Conventions: pixel ``(row, col)`` covers ``[col, col+1) x [row, row+1)`` and is
sampled at its center ``(col + 0.5, row + 0.5)``. Point coordinates are
``(x, y) = (col, row)`` order. UV ``(u, v)`` maps to texel coordinates
``(0.5 + u (W-1), 0.5 + v (H-1))`` so the UV square spans texel centers
exactly and bilinear lookups at vertices never hit the clamped border.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .facemodel import FaceModel

ZBUFFER_EMPTY = -1e8
DEPTH_TIE = 1e-9  # depths this close count as equal; the lower triangle index wins


@dataclass(frozen=True, eq=False)
class RasterState:
    """Per-pixel visibility of a posed mesh.

    ``owner`` is the first vertex of the winning triangle, ``triangle`` its
    index and ``bary`` its barycentric weights at the pixel center; all three
    are -1 / 0 where ``face_mask`` is false.
    """

    zbuffer: np.ndarray
    owner: np.ndarray
    face_mask: np.ndarray
    triangle: np.ndarray
    bary: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.face_mask.shape


def rasterize(verts: np.ndarray, triangles: np.ndarray, width: int, height: int,
              zbuffer: np.ndarray | None = None) -> RasterState:
    """Z-buffered coverage of ``triangles`` on a ``height x width`` frame.

    A pixel center is inside a triangle when all three barycentric weights are
    >= 0; among covering triangles the largest interpolated depth wins, and a
    depth tie (equal after rounding to ``DEPTH_TIE``) keeps the lower triangle
    index, so shared edges and vertices resolve the same way regardless of
    floating-point noise in the interpolation. Zero-area triangles cover
    nothing. ``zbuffer`` optionally seeds the depth test (defaults to the
    empty sentinel everywhere).
    """
    if width < 1 or height < 1:
        raise InvalidArgument("frame must be at least 1x1")
    verts = np.asarray(verts, dtype=float)
    tris = np.asarray(triangles, dtype=np.int64)
    zbuf = np.full((height, width), ZBUFFER_EMPTY) if zbuffer is None else np.array(zbuffer, dtype=float)
    tri_idx = np.full((height, width), -1, dtype=np.int64)
    bary = np.zeros((height, width, 3))

    xs, ys, zs = verts[tris, 0], verts[tris, 1], verts[tris, 2]
    area = (xs[:, 1] - xs[:, 0]) * (ys[:, 2] - ys[:, 0]) - (xs[:, 2] - xs[:, 0]) * (ys[:, 1] - ys[:, 0])
    finite = np.all(np.isfinite(verts[tris]), axis=(1, 2))
    with np.errstate(invalid="ignore"):
        c0 = np.maximum(np.floor(xs.min(1) - 0.5), 0)
        c1 = np.minimum(np.ceil(xs.max(1) - 0.5), width - 1)
        r0 = np.maximum(np.floor(ys.min(1) - 0.5), 0)
        r1 = np.minimum(np.ceil(ys.max(1) - 0.5), height - 1)
    live = finite & (area != 0) & (c0 <= c1) & (r0 <= r1)
    t_live = np.flatnonzero(live)
    bw = (c1[t_live] - c0[t_live]).astype(np.int64) + 1
    bh = (r1[t_live] - r0[t_live]).astype(np.int64) + 1

    # candidate (triangle, pixel) pairs, bucketed by padded bounding-box size
    cand_pix, cand_depth, cand_tri, cand_w = [], [], [], []
    kw = 1 << np.ceil(np.log2(bw)).astype(np.int64) if bw.size else bw
    kh = 1 << np.ceil(np.log2(bh)).astype(np.int64) if bh.size else bh
    for gh, gw in set(zip(kh.tolist(), kw.tolist())):
        sel = (kh == gh) & (kw == gw)
        t = t_live[sel]
        oy, ox = np.meshgrid(np.arange(gh), np.arange(gw), indexing="ij")
        col = c0[t][:, None, None].astype(np.int64) + ox
        row = r0[t][:, None, None].astype(np.int64) + oy
        valid = (ox < bw[sel][:, None, None]) & (oy < bh[sel][:, None, None])
        px = col + 0.5
        py = row + 0.5
        x0, x1, x2 = (xs[t, k][:, None, None] for k in range(3))
        y0, y1, y2 = (ys[t, k][:, None, None] for k in range(3))
        a = area[t][:, None, None]
        w0 = ((x1 - px) * (y2 - py) - (x2 - px) * (y1 - py)) / a
        w1 = ((x2 - px) * (y0 - py) - (x0 - px) * (y2 - py)) / a
        w2 = ((x0 - px) * (y1 - py) - (x1 - px) * (y0 - py)) / a
        inside = valid & (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        depth = w0 * zs[t, 0][:, None, None] + w1 * zs[t, 1][:, None, None] + w2 * zs[t, 2][:, None, None]
        ti = np.broadcast_to(t[:, None, None], inside.shape)
        cand_pix.append(row[inside] * width + col[inside])
        cand_depth.append(depth[inside])
        cand_tri.append(ti[inside])
        cand_w.append(np.stack([w0[inside], w1[inside], w2[inside]], axis=1))

    if cand_pix:
        pix = np.concatenate(cand_pix)
        depth = np.concatenate(cand_depth)
        tri = np.concatenate(cand_tri)
        wts = np.concatenate(cand_w)
        keep = depth > zbuf.ravel()[pix]
        pix, depth, tri, wts = pix[keep], depth[keep], tri[keep], wts[keep]
        # per pixel: largest depth, ties to the lowest triangle index
        order = np.lexsort((tri, -np.round(depth / DEPTH_TIE), pix))
        first = np.ones(order.size, dtype=bool)
        first[1:] = pix[order][1:] != pix[order][:-1]
        win = order[first]
        zbuf.ravel()[pix[win]] = depth[win]
        tri_idx.ravel()[pix[win]] = tri[win]
        bary.reshape(-1, 3)[pix[win]] = wts[win]

    mask = tri_idx >= 0
    owner = np.where(mask, tris[np.maximum(tri_idx, 0), 0], -1)
    return RasterState(zbuffer=zbuf, owner=owner, face_mask=mask, triangle=tri_idx, bary=bary)


def render_additive(image: np.ndarray, raster: RasterState, colors: np.ndarray) -> np.ndarray:
    """Add each covered pixel's owner-vertex color to ``image`` (flat shading, no clipping)."""
    image = np.asarray(image, dtype=float)
    if image.shape[:2] != raster.shape:
        raise InvalidArgument(f"image {image.shape[:2]} does not match raster {raster.shape}")
    out = image.copy()
    m = raster.face_mask
    out[m] += np.asarray(colors, dtype=float)[raster.owner[m]]
    return out


def render_interpolated(image: np.ndarray, raster: RasterState, colors: np.ndarray,
                        triangles: np.ndarray) -> np.ndarray:
    """Overwrite covered pixels with barycentric-interpolated vertex colors."""
    out = np.array(image, dtype=float)
    m = raster.face_mask
    corners = np.asarray(triangles)[raster.triangle[m]]
    out[m] = np.einsum("pk,pkc->pc", raster.bary[m], np.asarray(colors, dtype=float)[corners])
    return out


def bilinear_weights(coords: np.ndarray, height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat texel indices (M, 4) and weights (M, 4) for border-clamped bilinear lookups."""
    coords = np.asarray(coords, dtype=float)
    fx = np.clip(coords[:, 0] - 0.5, 0, width - 1)
    fy = np.clip(coords[:, 1] - 0.5, 0, height - 1)
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    ax = fx - x0
    ay = fy - y0
    idx = np.stack([y0 * width + x0, y0 * width + x1, y1 * width + x0, y1 * width + x1], axis=1)
    w = np.stack([(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay], axis=1)
    return idx, w


def bilinear_sample(grid: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Sample an (H, W, C) grid at (M, 2) ``(x, y)`` coordinates."""
    grid = np.asarray(grid, dtype=float)
    h, w = grid.shape[:2]
    idx, wt = bilinear_weights(coords, h, w)
    flat = grid.reshape(h * w, -1)
    return np.einsum("mk,mkc->mc", wt, flat[idx])


def uv_to_texel(uv: np.ndarray, uv_h: int, uv_w: int) -> np.ndarray:
    uv = np.asarray(uv, dtype=float)
    return np.stack([0.5 + uv[:, 0] * (uv_w - 1), 0.5 + uv[:, 1] * (uv_h - 1)], axis=1)


_UV_RASTERS: "weakref.WeakKeyDictionary[FaceModel, dict]" = weakref.WeakKeyDictionary()


def uv_raster(model: FaceModel, uv_h: int, uv_w: int) -> RasterState:
    """Raster of the mesh laid flat in UV space (cached per model and size)."""
    if uv_h < 1 or uv_w < 1:
        raise InvalidArgument("UV dims must be >= 1")
    per_model = _UV_RASTERS.setdefault(model, {})
    key = (uv_h, uv_w)
    if key not in per_model:
        xy = uv_to_texel(model.uv_coords, uv_h, uv_w)
        flat = np.concatenate([xy, np.zeros((xy.shape[0], 1))], axis=1)
        per_model[key] = rasterize(flat, model.triangles, uv_w, uv_h)
    return per_model[key]


def vertex_colors_to_uv(model: FaceModel, colors: np.ndarray, uv_h: int, uv_w: int) -> np.ndarray:
    """Paint vertex colors into an (uv_h, uv_w, 3) texture with interpolated shading.

    Texels outside every UV triangle stay zero.
    """
    raster = uv_raster(model, uv_h, uv_w)
    return render_interpolated(np.zeros((uv_h, uv_w, 3)), raster, colors, model.triangles)


def uv_to_vertex_colors(model: FaceModel, texture: np.ndarray) -> np.ndarray:
    h, w = texture.shape[:2]
    return bilinear_sample(texture, uv_to_texel(model.uv_coords, h, w))


def image_to_vertex_colors(image: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Per-vertex colors read from ``image`` at projected vertex positions (border clamped)."""
    return bilinear_sample(image, verts[:, :2])


def extract_uv_texture(model: FaceModel, image: np.ndarray, verts: np.ndarray,
                       uv_h: int, uv_w: int) -> np.ndarray:
    """Face texture of ``image`` unwrapped into UV space (image -> vertex colors -> UV)."""
    return vertex_colors_to_uv(model, image_to_vertex_colors(image, verts), uv_h, uv_w)


def background_ratio(raster: RasterState) -> float:
    """Fraction of pixels not covered by the face."""
    m = raster.face_mask
    return float((m.size - np.count_nonzero(m)) / m.size)
