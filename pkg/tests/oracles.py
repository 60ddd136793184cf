"""Slow, independent reference implementations used as test oracles."""
import math

import numpy as np


def _edge(p, q, px, py):
    """Twice the signed area of (p, q, (px, py))."""
    return (q[0] - p[0]) * (py - p[1]) - (q[1] - p[1]) * (px - p[0])


def point_in_triangle(px, py, a, b, c):
    """Barycentric weights of (px, py) in triangle abc, or None if outside or degenerate.

    The inside decision uses edge-function signs only, so points exactly on an
    edge of a lattice-valued triangle are classified without rounding.
    """
    area = _edge(a, b, c[0], c[1])
    if area == 0:
        return None
    e0, e1, e2 = _edge(b, c, px, py), _edge(c, a, px, py), _edge(a, b, px, py)
    if area > 0 and min(e0, e1, e2) < 0 or area < 0 and max(e0, e1, e2) > 0:
        return None
    return e0 / area, e1 / area, e2 / area


def brute_rasterize(verts, triangles, width, height):
    """Per-pixel loop over every triangle: (owner, triangle, depth) grids, -1 / None where empty."""
    owner = np.full((height, width), -1)
    tri_of = np.full((height, width), -1)
    depth = np.full((height, width), -1e8)
    for row in range(height):
        for col in range(width):
            px, py = col + 0.5, row + 0.5
            best = None
            for t, (i, j, k) in enumerate(triangles):
                w = point_in_triangle(px, py, verts[i], verts[j], verts[k])
                if w is None:
                    continue
                z = w[0] * verts[i][2] + w[1] * verts[j][2] + w[2] * verts[k][2]
                if z <= -1e8:
                    continue
                key = round(z / 1e-9)  # equal within 1e-9 is a tie; first (lowest) index kept
                if best is None or key > best[2]:
                    best = (z, t, key)
            if best is not None:
                depth[row, col] = best[0]
                tri_of[row, col] = best[1]
                owner[row, col] = triangles[best[1]][0]
    return owner, tri_of, depth


def brute_render_additive(image, owner, colors):
    out = np.array(image, dtype=float)
    for row in range(out.shape[0]):
        for col in range(out.shape[1]):
            if owner[row, col] >= 0:
                out[row, col] = out[row, col] + colors[owner[row, col]]
    return out


def bilinear_formula(grid, x, y):
    """Closed-form bilinear value at texel coordinates (x, y), centers at +0.5, border clamped."""
    h, w = grid.shape[:2]
    fx = min(max(x - 0.5, 0.0), w - 1)
    fy = min(max(y - 0.5, 0.0), h - 1)
    x0, y0 = int(math.floor(fx)), int(math.floor(fy))
    x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
    ax, ay = fx - x0, fy - y0
    return ((1 - ax) * (1 - ay) * grid[y0, x0] + ax * (1 - ay) * grid[y0, x1]
            + (1 - ax) * ay * grid[y1, x0] + ax * ay * grid[y1, x1])


def dense_reconstruct(mean_shape, basis_id, basis_exp, rotation, alpha_id, alpha_exp, t_2d):
    """Dense 3DMM reconstruction with an explicit block-diagonal pose matrix acting on the flat shape."""
    nv = mean_shape.shape[0]
    flat = mean_shape.reshape(-1) + basis_id @ alpha_id + basis_exp @ alpha_exp
    big_r = np.kron(np.eye(nv), rotation)
    out = (big_r @ flat).reshape(nv, 3)
    out[:, 0] += t_2d[0]
    out[:, 1] += t_2d[1]
    return out


def sweep_accuracy(distances, labels):
    """Best accuracy over positive thresholds (genuine iff d < threshold), by exhaustive sweep."""
    d = np.asarray(distances, dtype=float)
    lab = np.asarray(labels).astype(bool)
    s = np.sort(d)
    cands = np.concatenate([[d.min() / 2, d.max() + 1], d, (s[1:] + s[:-1]) / 2])
    return max(float(np.mean((d < g) == lab)) for g in cands if g > 0)


def brute_knn_mean(buffer, e, k):
    dists = sorted(math.dist(list(b), list(e)) for b in buffer)
    return math.fsum(dists[:k]) / k


def brute_nearest(keys, q):
    best, best_i = None, None
    for i, k in enumerate(keys):
        d = math.dist(list(k), list(q))
        if best is None or d < best:
            best, best_i = d, i
    return best_i
