"""Toy face-verification target with a hard-label, query-counted interface.

The verifier embeds an image by masking everything outside a central ellipse,
average-pooling, and applying a fixed random projection. Two images match when
the squared distance between their L2-normalized features is below a threshold.
Two further encoders live here: a surrogate (different projection, no mask)
used for dictionary keys, and a pooled similarity encoder for the detector.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .errors import BudgetExhausted, InvalidArgument, UndefinedFeature

SURROGATE_SEED = 7919
SIMILARITY_POOL = (8, 8)


@dataclass(frozen=True)
class VerifierConfig:
    seed: int = 0
    feature_dim: int = 128
    pool: tuple[int, int] = (16, 16)
    ellipse_center: tuple[float, float] = (0.5, 0.45)
    ellipse_radii: tuple[float, float] = (0.35, 0.42)
    threshold: float = 0.5

    def __post_init__(self):
        if self.feature_dim < 1:
            raise InvalidArgument("feature_dim must be >= 1")
        if self.pool[0] < 1 or self.pool[1] < 1:
            raise InvalidArgument("pool must be >= 1x1")
        if not self.threshold > 0:
            raise InvalidArgument("threshold must be > 0")

    def with_threshold(self, threshold: float) -> "VerifierConfig":
        return VerifierConfig(self.seed, self.feature_dim, tuple(self.pool),
                              tuple(self.ellipse_center), tuple(self.ellipse_radii), float(threshold))


@lru_cache(maxsize=32)
def _projection(seed: int, dim: int, n_in: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(0.0, np.sqrt(1.0 / n_in), size=(dim, n_in))
    m.flags.writeable = False
    return m


@lru_cache(maxsize=32)
def ellipse_mask(height: int, width: int, center: tuple[float, float],
                 radii: tuple[float, float]) -> np.ndarray:
    """Boolean (H, W) mask of pixel centers inside the relative-coordinate ellipse."""
    x = (np.arange(width) + 0.5) / width
    y = (np.arange(height) + 0.5) / height
    dx = (x[None, :] - center[0]) / radii[0]
    dy = (y[:, None] - center[1]) / radii[1]
    m = dx ** 2 + dy ** 2 <= 1.0
    m.flags.writeable = False
    return m


def average_pool(image: np.ndarray, ph: int, pw: int) -> np.ndarray:
    """Mean over a ``ph x pw`` partition of the frame (bin edges ``floor(k H / ph)``)."""
    h, w = image.shape[:2]
    if h % ph == 0 and w % pw == 0:
        return image.reshape(ph, h // ph, pw, w // pw, -1).mean(axis=(1, 3))
    re = (np.arange(ph) * h) // ph
    ce = (np.arange(pw) * w) // pw
    rows = np.add.reduceat(image, re, axis=0)
    cells = np.add.reduceat(rows, ce, axis=1)
    rc = np.diff(np.append(re, h))
    cc = np.diff(np.append(ce, w))
    return cells / (rc[:, None, None] * cc[None, :, None])


@lru_cache(maxsize=32)
def _masked_pool_matrix(h: int, w: int, ph: int, pw: int, center, radii) -> sparse.csr_matrix:
    """Sparse (ph*pw*3, h*w*3) operator: zero outside the ellipse, then average-pool."""
    mask = ellipse_mask(h, w, center, radii)
    re = (np.arange(ph) * h) // ph
    ce = (np.arange(pw) * w) // pw
    rbin = np.searchsorted(re, np.arange(h), side="right") - 1
    cbin = np.searchsorted(ce, np.arange(w), side="right") - 1
    rc = np.diff(np.append(re, h))
    cc = np.diff(np.append(ce, w))
    r, c, ch = np.meshgrid(np.arange(h), np.arange(w), np.arange(3), indexing="ij")
    keep = mask[r, c]
    rows = (rbin[r] * pw + cbin[c]) * 3 + ch
    cols = (r * w + c) * 3 + ch
    vals = 1.0 / (rc[rbin[r]] * cc[cbin[c]])
    return sparse.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(ph * pw * 3, h * w * 3))


def embed(image: np.ndarray, config: VerifierConfig) -> np.ndarray:
    """Verifier feature (length ``feature_dim``) of an (H, W, 3) image."""
    image = np.asarray(image, dtype=float)
    h, w = image.shape[:2]
    ph, pw = config.pool
    pool = _masked_pool_matrix(h, w, ph, pw, tuple(config.ellipse_center), tuple(config.ellipse_radii))
    proj = _projection(config.seed, config.feature_dim, ph * pw * 3)
    return proj @ (pool @ image.ravel())


def pair_distance(f1: np.ndarray, f2: np.ndarray) -> float:
    """Squared Euclidean distance between L2-normalized features, in [0, 4]."""
    n1 = np.linalg.norm(f1)
    n2 = np.linalg.norm(f2)
    if n1 == 0 or n2 == 0:
        raise UndefinedFeature("feature has zero norm")
    d = np.asarray(f1) / n1 - np.asarray(f2) / n2
    return float(d @ d)


def calibrate_threshold(distances, labels) -> tuple[float, float]:
    """Pick the threshold with the best verification accuracy.

    ``labels`` are truthy for genuine pairs; a pair is predicted genuine iff
    its distance is below the threshold. Accuracy is piecewise constant between
    consecutive distinct distances (with 0 and 4 closing the outer intervals);
    the midpoint of the lowest optimal interval is returned with its accuracy.
    """
    d = np.asarray(distances, dtype=float)
    y = np.asarray(labels, dtype=bool)
    if d.size == 0 or d.shape != y.shape:
        raise InvalidArgument("need equally long, nonempty distance and label lists")
    cuts = np.unique(d)
    # threshold in (edges[j], edges[j+1]] predicts genuine exactly for d <= edges[j]
    edges = np.concatenate([[min(0.0, cuts[0])], cuts, [max(4.0, cuts[-1] + 1.0)]])
    best_acc, best_gamma = -1.0, None
    for j in range(len(edges) - 1):
        if edges[j + 1] <= edges[j]:
            continue
        if j == 0:
            pred = np.zeros_like(y)
        else:
            pred = d <= edges[j]
        acc = float(np.mean(pred == y))
        if acc > best_acc:
            lo, hi = edges[j], edges[j + 1]
            best_acc, best_gamma = acc, 0.5 * (lo + hi)
    return float(best_gamma), best_acc


def surrogate_feature(image: np.ndarray, feature_dim: int = 128, pool: tuple[int, int] = (16, 16),
                      seed: int = SURROGATE_SEED) -> np.ndarray:
    """Unit-norm feature from a second, unmasked encoder (dictionary keys)."""
    pooled = average_pool(np.asarray(image, dtype=float), *pool)
    f = _projection(seed, feature_dim, pooled.size) @ pooled.ravel()
    n = np.linalg.norm(f)
    if n == 0:
        raise UndefinedFeature("surrogate feature has zero norm")
    return f / n


def similarity_embed(image: np.ndarray) -> np.ndarray:
    """Pooled 8x8x3 unit-norm embedding used by the query-similarity detector."""
    e = average_pool(np.asarray(image, dtype=float), *SIMILARITY_POOL).ravel()
    n = np.linalg.norm(e)
    if n == 0:
        raise UndefinedFeature("similarity embedding of a zero image")
    return e / n


class HardLabelOracle:
    """Black-box verifier bound to one enrolled image and one attacked image.

    ``verify`` answers 1 (same identity) or 0 and consumes one query. The
    enrolled image is kept private; attacks only see ``x_a``, the label
    ``original_label`` of the unmodified pair, and the counters.
    """

    def __init__(self, config: VerifierConfig, enrolled: np.ndarray, x_a: np.ndarray,
                 budget: int = 10_000):
        self.config = config
        self.x_a = np.asarray(x_a, dtype=float)
        self.budget = int(budget)
        self.queries = 0
        self._enrolled_feature = embed(enrolled, config)
        self.original_label = self._label(self.x_a)

    def __repr__(self):
        return f"HardLabelOracle(queries={self.queries}, budget={self.budget})"

    def _label(self, image: np.ndarray) -> int:
        d = pair_distance(embed(image, self.config), self._enrolled_feature)
        return int(d < self.config.threshold)

    @property
    def remaining(self) -> int:
        return self.budget - self.queries

    def verify(self, image: np.ndarray) -> int:
        if self.queries >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} queries used")
        self.queries += 1
        return self._label(image)

    def verify_clean(self, image: np.ndarray) -> int:
        """Noise-free query; identical to ``verify`` unless a wrapper adds noise."""
        return self.verify(image)

    def is_adversarial(self, label: int) -> bool:
        return label != self.original_label

    def audit(self, image: np.ndarray) -> int:
        """Label ``image`` out-of-band without counting a query. For evaluation only."""
        return self._label(image)

    detections = 0

    # hooks used by query wrappers; the bare oracle ignores them
    def set_best(self, image: np.ndarray, point, verified: bool = False) -> None:
        pass

    def reported(self):
        return None

    @property
    def last_detected(self) -> bool:
        return False

    @property
    def last_clean(self) -> bool:
        return False


class OracleWrapper:
    """Base for query wrappers: forwards everything it does not override."""

    def __init__(self, inner):
        self.inner = inner

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def verify(self, image: np.ndarray) -> int:
        return self.inner.verify(image)

    def verify_clean(self, image: np.ndarray) -> int:
        return self.inner.verify_clean(image)

    def set_best(self, image: np.ndarray, point, verified: bool = False) -> None:
        self.inner.set_best(image, point, verified)

    def reported(self):
        return self.inner.reported()
