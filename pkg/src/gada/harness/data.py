"""Synthetic face pairs standing in for a verification benchmark."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from ..facemodel import AlignmentParams, FaceModel, generate_synthetic_model, pose_matrix, \
    reconstruct_vertices
from ..oracle import VerifierConfig, calibrate_threshold, ellipse_mask, embed, pair_distance
from ..renderer import rasterize, render_interpolated, uv_to_vertex_colors
from ..tensorfile import load_tensors, save_tensors

DEFAULT_IMAGE_DIMS = (32, 32)
MODEL_SEED = 1
MODEL_GRID = 24
MODEL_N_ID = 8
MODEL_N_EXP = 4


def default_model(seed: int = MODEL_SEED) -> FaceModel:
    return generate_synthetic_model(seed, MODEL_GRID, MODEL_N_ID, MODEL_N_EXP)


@dataclass(eq=False)
class Dataset:
    """Images ``2i`` (left) and ``2i + 1`` (right) show identity ``i``.

    Dodging pair i attacks the left image against the enrolled right image.
    Impersonation pair i attacks ``left[perm[i]]`` so that it is accepted as
    identity ``i``; the attacker's source picture of that identity is
    ``left[i]``.
    """

    model: FaceModel
    images: np.ndarray
    params: list[AlignmentParams]
    perm: np.ndarray
    seed: int
    threshold: float | None = None

    @property
    def n_pairs(self) -> int:
        return len(self.perm)

    def left(self, i: int) -> int:
        return 2 * i

    def right(self, i: int) -> int:
        return 2 * i + 1

    def verts(self, idx: int) -> np.ndarray:
        return reconstruct_vertices(self.model, self.params[idx])

    def save(self, path: str | os.PathLike) -> None:
        p = self.params
        save_tensors(path, {
            "images": self.images,
            "rotation": np.stack([q.rotation for q in p]),
            "alpha_id": np.stack([q.alpha_id for q in p]),
            "alpha_exp": np.stack([q.alpha_exp for q in p]),
            "t_2d": np.stack([q.t_2d for q in p]),
            "perm": self.perm.astype(np.int32),
        }, meta={"seed": self.seed, "threshold": self.threshold})

    @classmethod
    def load(cls, path: str | os.PathLike, model: FaceModel) -> "Dataset":
        t, meta = load_tensors(path)
        params = [AlignmentParams(r, a, e, tt) for r, a, e, tt in
                  zip(t["rotation"], t["alpha_id"], t["alpha_exp"], t["t_2d"])]
        return cls(model, t["images"], params, t["perm"], int(meta.get("seed", 0)),
                   meta.get("threshold"))


def smooth_field(rng: np.random.Generator, h: int, w: int, n_waves: int = 4,
                 amplitude: float = 0.12, max_freq: float = 2.5) -> np.ndarray:
    """Sum of random low-frequency planar sinusoids, (h, w, 3)."""
    y = (np.arange(h) + 0.5)[:, None] / h
    x = (np.arange(w) + 0.5)[None, :] / w
    out = np.zeros((h, w, 3))
    for _ in range(n_waves):
        fx, fy = rng.uniform(-max_freq, max_freq, size=2)
        phase = rng.uniform(0, 2 * np.pi)
        colour = rng.normal(size=3)
        colour *= amplitude / np.linalg.norm(colour)
        out += np.sin(2 * np.pi * (fx * x + fy * y) + phase)[..., None] * colour
    return out


def identity_texture(rng: np.random.Generator, uv_h: int, uv_w: int) -> np.ndarray:
    base = rng.uniform(0.35, 0.65, size=3)
    return np.clip(base + smooth_field(rng, uv_h, uv_w), 0.22, 0.78)


def random_background(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    base = rng.uniform(0.2, 0.8, size=3)
    return np.clip(base + smooth_field(rng, h, w, n_waves=5, amplitude=0.2, max_freq=3.0), 0, 1)


def _random_view(rng, model, image_dims, alpha_id, face_center):
    h, w = image_dims
    scale = 0.46 * w
    rot = pose_matrix(yaw=rng.uniform(-0.25, 0.25), pitch=rng.uniform(-0.15, 0.15),
                      roll=rng.uniform(-0.1, 0.1), scale=scale * rng.uniform(0.97, 1.03))
    alpha_exp = rng.normal(0, 0.01 * np.sqrt(3 * model.n_vertices), size=model.n_exp)
    t = np.array([face_center[0] * w, face_center[1] * h]) + rng.uniform(-0.7, 0.7, size=2)
    return AlignmentParams(rot, alpha_id, alpha_exp, t)


def render_face(model: FaceModel, params: AlignmentParams, texture: np.ndarray,
                background: np.ndarray, gain: float = 1.0):
    """Background with the textured face drawn over it (interpolated shading)."""
    h, w = background.shape[:2]
    verts = reconstruct_vertices(model, params)
    raster = rasterize(verts, model.triangles, w, h)
    colours = uv_to_vertex_colors(model, texture) * gain
    return np.clip(render_interpolated(background, raster, colours, model.triangles), 0, 1), raster


def gen_data(seed: int, n_pairs: int, image_dims: tuple[int, int] = DEFAULT_IMAGE_DIMS,
             model: FaceModel | None = None, verifier: VerifierConfig | None = None,
             max_pose_draws: int = 100) -> Dataset:
    """Deterministic synthetic pairs: two views of each of ``n_pairs`` identities.

    Views differ in pose, expression, global gain and background. Poses are
    redrawn until the face covers the verifier's ellipse, so background pixels
    never reach the verifier.
    """
    if n_pairs < 1:
        raise InvalidArgument("n_pairs must be >= 1")
    model = default_model() if model is None else model
    verifier = VerifierConfig() if verifier is None else verifier
    h, w = image_dims
    ell = ellipse_mask(h, w, tuple(verifier.ellipse_center), tuple(verifier.ellipse_radii))
    rng = np.random.default_rng(seed)
    images, params = [], []
    for _ in range(n_pairs):
        tex = identity_texture(rng, h, w)
        alpha_id = rng.normal(0, 0.01 * np.sqrt(3 * model.n_vertices), size=model.n_id)
        for _view in range(2):
            bg = random_background(rng, h, w)
            gain = rng.uniform(0.95, 1.05)
            for _draw in range(max_pose_draws):
                p = _random_view(rng, model, image_dims, alpha_id, verifier.ellipse_center)
                img, raster = render_face(model, p, tex, bg, gain)
                if np.all(raster.face_mask[ell]):
                    break
            else:
                raise RuntimeError("could not draw a pose covering the verifier ellipse")
            images.append(img)
            params.append(p)
    perm = derangement(rng, n_pairs)
    return Dataset(model, np.stack(images), params, perm, seed)


def derangement(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random permutation without fixed points (identity for n == 1)."""
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    while True:
        p = rng.permutation(n)
        if np.all(p != np.arange(n)):
            return p


def pair_distances(data: Dataset, verifier: VerifierConfig) -> tuple[np.ndarray, np.ndarray]:
    """Genuine (left_i, right_i) and impostor (left_perm[i], right_i) distances."""
    feats = [embed(img, verifier) for img in data.images]
    gen = np.array([pair_distance(feats[data.left(i)], feats[data.right(i)])
                    for i in range(data.n_pairs)])
    imp = np.array([pair_distance(feats[data.left(int(data.perm[i]))], feats[data.right(i)])
                    for i in range(data.n_pairs)])
    return gen, imp


def calibrate_verifier(verifier: VerifierConfig, seed: int = 10_000, n_pairs: int = 100,
                       image_dims: tuple[int, int] = DEFAULT_IMAGE_DIMS,
                       model: FaceModel | None = None) -> tuple[VerifierConfig, float]:
    """Fit the threshold on a held-out synthetic calibration set.

    Returns the updated config and its calibration accuracy.
    """
    data = gen_data(seed, n_pairs, image_dims, model, verifier)
    gen, imp = pair_distances(data, verifier)
    gamma, acc = calibrate_threshold(np.concatenate([gen, imp]),
                                     np.concatenate([np.ones_like(gen), np.zeros_like(imp)]))
    return verifier.with_threshold(gamma), acc
