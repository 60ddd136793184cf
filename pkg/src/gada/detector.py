"""Stateful query-similarity detection over a circular buffer of embeddings."""
from __future__ import annotations

import math
from collections import deque

import numpy as np

from .errors import InvalidArgument, UndefinedFeature
from .oracle import OracleWrapper, similarity_embed

CLEAN = "clean"
DETECTED = "detected"


class StatefulDetector:
    """Flags a query whose k nearest buffered embeddings are, on average, closer than ``threshold``.

    The check runs only once the buffer holds at least ``k`` embeddings. On
    detection the buffer is flushed and the query's embedding is dropped;
    otherwise it is appended, evicting the oldest when full. ``statistic``
    selects the mean over the k neighbours (``"mean"``) or the k-th distance
    (``"kth"``).
    """

    def __init__(self, threshold: float, k: int = 50, capacity: int = 100,
                 statistic: str = "mean"):
        if k < 1 or capacity < k:
            raise InvalidArgument("need 1 <= k <= capacity")
        if statistic not in ("mean", "kth"):
            raise InvalidArgument(f"unknown statistic {statistic!r}")
        self.threshold = float(threshold)
        self.k = int(k)
        self.capacity = int(capacity)
        self.statistic = statistic
        self.buffer: deque[np.ndarray] = deque(maxlen=self.capacity)
        self.detection_count = 0
        self.history: list[float] = []

    def knn_distance(self, e: np.ndarray) -> float:
        d = np.array([math.dist(b, e) for b in self.buffer])
        nearest = np.partition(d, self.k - 1)[:self.k]
        if self.statistic == "kth":
            return float(nearest.max())
        return math.fsum(nearest) / self.k  # exactly rounded, independent of order

    def observe_embedding(self, e: np.ndarray) -> str:
        if len(self.buffer) > self.k - 1:
            dist = self.knn_distance(e)
            self.history.append(dist)
            if dist < self.threshold:
                self.detection_count += 1
                self.buffer.clear()
                return DETECTED
        self.buffer.append(e)
        return CLEAN

    def observe(self, image: np.ndarray) -> str:
        try:
            e = similarity_embed(image)
        except UndefinedFeature:
            # an all-zero image is maximally distant from every stored embedding
            return CLEAN
        return self.observe_embedding(e)


def calibrate(benign_images, percentile: float = 1.0, k: int = 50, capacity: int = 100,
              statistic: str = "mean") -> float:
    """Nearest-rank lower percentile of k-NN distances seen on benign traffic.

    The stream runs through a detector that never fires (threshold -inf).
    """
    images = list(benign_images)
    if len(images) < k + 1:
        raise InvalidArgument(f"need at least k+1 = {k + 1} benign images")
    det = StatefulDetector(-math.inf, k, capacity, statistic)
    for img in images:
        det.observe(img)
    return percentile_nearest_rank(det.history, percentile)


def percentile_nearest_rank(values, percentile: float) -> float:
    """Lower nearest-rank percentile: the value at rank max(1, floor(p * n / 100)).

    Rounding the rank down keeps the 1st percentile at the minimum for fewer
    than 200 values, so a calibration stream replayed at its own threshold
    (strict ``<``) is never flagged.
    """
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise InvalidArgument("no values")
    rank = max(1, math.floor(percentile / 100.0 * v.size))
    return float(v[rank - 1])


class DetectingOracle(OracleWrapper):
    """Runs every query through a detector before answering; labels are never withheld."""

    def __init__(self, inner, detector: StatefulDetector):
        super().__init__(inner)
        self.detector = detector
        self._own = 0

    def _observe(self, image):
        if self.inner.remaining <= 0:
            return
        if self.detector.observe(image) == DETECTED:
            self._own += 1

    def verify(self, image):
        self._observe(image)
        return self.inner.verify(image)

    def verify_clean(self, image):
        self._observe(image)
        return self.inner.verify_clean(image)

    @property
    def detections(self) -> int:
        return self._own + self.inner.detections
