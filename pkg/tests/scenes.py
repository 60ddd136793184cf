"""Random small rasterization scenes shared by unit and acceptance tests."""
import numpy as np


def random_scene(rng: np.random.Generator, max_size: int = 32, max_tris: int = 20):
    """Vertices mix free floats and half-integer lattice points (exact edge hits),
    with shared, duplicated and degenerate triangles thrown in."""
    w = int(rng.integers(1, max_size + 1))
    h = int(rng.integers(1, max_size + 1))
    n_tris = int(rng.integers(1, max_tris + 1))
    n_verts = int(rng.integers(3, 3 * n_tris + 1))
    xy = rng.uniform(-4, [w + 4, h + 4], size=(n_verts, 2))
    lattice = rng.random(n_verts) < 0.4
    xy[lattice] = np.round(xy[lattice] * 2) / 2
    z = rng.uniform(-5, 5, size=n_verts)
    z[rng.random(n_verts) < 0.3] = 1.0
    verts = np.column_stack([xy, z])
    tris = rng.integers(0, n_verts, size=(n_tris, 3))
    if n_tris > 1 and rng.random() < 0.5:
        tris[-1] = tris[0]  # exact duplicate: depth tie
    if rng.random() < 0.3:
        # exactly collinear lattice points: zero area without rounding
        p = np.round(rng.uniform(0, [w, h]) * 2) / 2
        d = np.round(rng.uniform(-4, 4, 2) * 2) / 2
        line = np.column_stack([p + np.outer([0, 1, 2], d), rng.uniform(-5, 5, 3)])
        verts = np.vstack([verts, line])
        tris[0] = [n_verts, n_verts + 2, n_verts + 1]
    return verts, tris, w, h
