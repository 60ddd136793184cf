"""Feature-keyed store of adversarial perturbations reused as warm starts."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .tensorfile import load_tensors, save_tensors

FULL = "full"
SINGLE_SLOT = "single_slot"
RANDOM_FETCH = "random_fetch"
POLICIES = (FULL, SINGLE_SLOT, RANDOM_FETCH)
SAME_KEY = 1e-9
SCALE_FACTOR = 1.05
SCALE_MAX_STEPS = 30


@dataclass
class DictEntry:
    key: np.ndarray
    perturbation: np.ndarray


@dataclass
class Dictionary:
    """Ordered entries plus a fetch/store policy.

    ``full`` fetches the nearest key; ``single_slot`` keeps only the latest
    entry; ``random_fetch`` returns an exact key match if present, otherwise a
    uniformly random entry.
    """

    policy: str = FULL
    entries: list[DictEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise InvalidArgument(f"unknown dictionary policy {self.policy!r}")

    def __len__(self):
        return len(self.entries)

    def _keys(self) -> np.ndarray:
        return np.stack([e.key for e in self.entries])

    def _distances(self, key: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self._keys() - key[None, :], axis=1)

    def store(self, key: np.ndarray, perturbation: np.ndarray) -> None:
        key = np.asarray(key, dtype=float).copy()
        entry = DictEntry(key, np.array(perturbation, dtype=float))
        if self.policy == SINGLE_SLOT:
            self.entries = [entry]
            return
        if self.entries:
            d = self._distances(key)
            j = int(np.argmin(d))
            if d[j] < SAME_KEY:
                self.entries[j] = entry
                return
        self.entries.append(entry)

    def fetch(self, key: np.ndarray, rng: np.random.Generator | None = None) -> DictEntry | None:
        if not self.entries:
            return None
        d = self._distances(np.asarray(key, dtype=float))
        j = int(np.argmin(d))  # first minimum = lowest insertion index
        if self.policy == RANDOM_FETCH and d[j] >= SAME_KEY:
            rng = np.random.default_rng() if rng is None else rng
            j = int(rng.integers(len(self.entries)))
        return self.entries[j]

    def save(self, path: str | os.PathLike) -> None:
        if self.entries:
            keys = self._keys()
            perts = np.stack([e.perturbation for e in self.entries])
        else:
            keys = np.zeros((0, 0))
            perts = np.zeros((0,))
        save_tensors(path, {"keys": keys, "perturbations": perts}, meta={"policy": self.policy})

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Dictionary":
        t, meta = load_tensors(path)
        d = cls(policy=meta.get("policy", FULL))
        for k, p in zip(t["keys"], t["perturbations"]):
            d.entries.append(DictEntry(k, p))
        return d


def scale_until_adversarial(oracle, space, u: np.ndarray, factor: float = SCALE_FACTOR,
                            k_max: int = SCALE_MAX_STEPS) -> tuple[np.ndarray, int] | None:
    """Query ``u * factor**k`` for k = 0..k_max; return the first adversarial point and its k.

    Returns ``None`` after ``k_max + 1`` rejected queries.
    """
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise InvalidArgument("perturbation must be nonzero")
    for k in range(k_max + 1):
        point = u * factor ** k
        if oracle.is_adversarial(oracle.verify_clean(space.to_image(point))):
            return point, k
    return None
