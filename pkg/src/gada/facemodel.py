"""3D morphable face model: container, posed reconstruction, synthetic generator."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .tensorfile import load_tensors, save_tensors


@dataclass(frozen=True, eq=False)
class FaceModel:
    """PCA face model.

    Bases are stored vertex-interleaved: row ``3*v + k`` is coordinate ``k`` of
    vertex ``v``.

    Attributes:
        mean_shape: (N_V, 3) mean face in model units.
        basis_id: (3*N_V, n_id) identity basis.
        basis_exp: (3*N_V, n_exp) expression basis.
        uv_coords: (N_V, 2) per-vertex texture coordinates in [0, 1].
        triangles: (T, 3) vertex indices.
    """

    mean_shape: np.ndarray
    basis_id: np.ndarray
    basis_exp: np.ndarray
    uv_coords: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        nv = self.mean_shape.shape[0]
        if self.mean_shape.shape != (nv, 3) or nv < 3:
            raise InvalidArgument("mean_shape must be (N_V, 3) with N_V >= 3")
        for name in ("basis_id", "basis_exp"):
            b = getattr(self, name)
            if b.ndim != 2 or b.shape[0] != 3 * nv or b.shape[1] < 1:
                raise InvalidArgument(f"{name} must be (3*N_V, n) with n >= 1")
        if self.uv_coords.shape != (nv, 2):
            raise InvalidArgument("uv_coords must be (N_V, 2)")
        if np.any(self.uv_coords < 0) or np.any(self.uv_coords > 1):
            raise InvalidArgument("uv_coords must lie in [0, 1]")
        tri = self.triangles
        if tri.ndim != 2 or tri.shape[1] != 3 or tri.shape[0] < 1:
            raise InvalidArgument("triangles must be (T, 3) with T >= 1")
        if tri.min() < 0 or tri.max() >= nv:
            raise InvalidArgument("triangle index out of range")
        for arr in (self.mean_shape, self.basis_id, self.basis_exp, self.uv_coords, self.triangles):
            arr.flags.writeable = False

    @property
    def n_vertices(self) -> int:
        return self.mean_shape.shape[0]

    @property
    def n_id(self) -> int:
        return self.basis_id.shape[1]

    @property
    def n_exp(self) -> int:
        return self.basis_exp.shape[1]

    def save(self, path: str | os.PathLike) -> None:
        save_tensors(path, {
            "mean_shape": self.mean_shape,
            "basis_id": self.basis_id,
            "basis_exp": self.basis_exp,
            "uv_coords": self.uv_coords,
            "triangles": self.triangles.astype(np.int32),
        })

    @classmethod
    def load(cls, path: str | os.PathLike) -> "FaceModel":
        t, _ = load_tensors(path)
        return cls(t["mean_shape"], t["basis_id"], t["basis_exp"], t["uv_coords"],
                   t["triangles"])


@dataclass(frozen=True, eq=False)
class AlignmentParams:
    """Pose and shape coefficients for one image.

    ``rotation`` includes the weak-perspective scale (model units -> pixels).
    """

    rotation: np.ndarray
    alpha_id: np.ndarray
    alpha_exp: np.ndarray
    t_2d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "alpha_id", np.asarray(self.alpha_id, dtype=float).ravel())
        object.__setattr__(self, "alpha_exp", np.asarray(self.alpha_exp, dtype=float).ravel())
        object.__setattr__(self, "t_2d", np.asarray(self.t_2d, dtype=float).ravel())
        if self.rotation.shape != (3, 3):
            raise InvalidArgument("rotation must be 3x3")
        if self.t_2d.shape != (2,):
            raise InvalidArgument("t_2d must have 2 entries")


def pose_matrix(yaw: float = 0.0, pitch: float = 0.0, roll: float = 0.0,
                scale: float = 1.0) -> np.ndarray:
    """Scaled rotation ``scale * Rz(roll) @ Rx(pitch) @ Ry(yaw)`` (radians)."""
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rx = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]])
    rz = np.array([[cr, -sr, 0], [sr, cr, 0], [0, 0, 1]])
    return scale * rz @ rx @ ry


def reconstruct_vertices(model: FaceModel, params: AlignmentParams) -> np.ndarray:
    """Posed vertices ``R (S + A_id a_id + A_exp a_exp) + [t, 0]`` as (N_V, 3).

    Columns 0-1 are pixel coordinates (origin top-left, y down); column 2 is
    depth with larger values closer to the camera.
    """
    if params.alpha_id.shape[0] != model.n_id or params.alpha_exp.shape[0] != model.n_exp:
        raise InvalidArgument(
            f"coefficient lengths ({params.alpha_id.shape[0]}, {params.alpha_exp.shape[0]}) "
            f"do not match model bases ({model.n_id}, {model.n_exp})")
    offset = model.basis_id @ params.alpha_id + model.basis_exp @ params.alpha_exp
    shape = model.mean_shape + offset.reshape(-1, 3)
    verts = shape @ params.rotation.T
    verts[:, :2] += params.t_2d
    return verts


def _grid_triangles(n: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing="ij")
    a = (i * n + j).ravel()
    b = a + n       # (i+1, j)
    c = a + 1       # (i, j+1)
    d = a + n + 1   # (i+1, j+1)
    tris = np.empty((2 * a.size, 3), dtype=np.int64)
    tris[0::2] = np.stack([a, b, c], axis=1)
    tris[1::2] = np.stack([d, c, b], axis=1)
    return tris


def _sinusoid_basis(rng: np.random.Generator, u: np.ndarray, v: np.ndarray, n: int,
                    max_freq: int) -> np.ndarray:
    nv = u.size
    basis = np.empty((3 * nv, n))
    for col in range(n):
        fu, fv = rng.integers(1, max_freq + 1, size=2)
        pu, pv = rng.uniform(0, 2 * np.pi, size=2)
        amp = rng.normal(size=3)
        field = np.sin(np.pi * fu * u + pu) * np.sin(np.pi * fv * v + pv)
        disp = field[:, None] * amp[None, :]
        col_vec = disp.ravel()
        basis[:, col] = col_vec / np.linalg.norm(col_vec)
    return basis


def generate_synthetic_model(seed: int, grid_n: int, n_id: int, n_exp: int,
                             radii: tuple[float, float, float] = (1.0, 1.15, 0.8)) -> FaceModel:
    """Deterministic half-ellipsoid face on a ``grid_n x grid_n`` parametric grid.

    Vertex ``i * grid_n + j`` has UV ``(i, j) / (grid_n - 1)``. The square grid is
    mapped onto the elliptical footprint with the elliptical-grid (disc)
    mapping, so the frontal silhouette is an ellipse with semi-axes
    ``radii[:2]`` and the surface bulges towards the camera by ``radii[2]``.
    Identity and expression bases are unit-norm sinusoidal displacement fields.
    """
    if grid_n < 2:
        raise InvalidArgument("grid_n must be >= 2")
    if n_id < 1 or n_exp < 1:
        raise InvalidArgument("n_id and n_exp must be >= 1")
    rng = np.random.default_rng(seed)
    g = np.linspace(0.0, 1.0, grid_n)
    uu, vv = np.meshgrid(g, g, indexing="ij")
    u, v = uu.ravel(), vv.ravel()
    su, sv = 2 * u - 1, 2 * v - 1
    dx = su * np.sqrt(np.clip(1 - sv ** 2 / 2, 0, None))
    dy = sv * np.sqrt(np.clip(1 - su ** 2 / 2, 0, None))
    dz = np.sqrt(np.clip(1 - dx ** 2 - dy ** 2, 0, None))
    a, b, c = radii
    mean_shape = np.stack([a * dx, b * dy, c * dz], axis=1)
    uv = np.stack([u, v], axis=1)
    return FaceModel(
        mean_shape=mean_shape,
        basis_id=_sinusoid_basis(rng, u, v, n_id, max_freq=2),
        basis_exp=_sinusoid_basis(rng, u, v, n_exp, max_freq=3),
        uv_coords=uv,
        triangles=_grid_triangles(grid_n),
    )
