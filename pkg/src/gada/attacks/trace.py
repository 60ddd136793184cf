"""Per-query attack records."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

SUCCESS = "success"
INIT_FAILED = "init-failed"
BUDGET_EXHAUSTED = "budget-exhausted"
SKIPPED = "skipped"  # the unmodified pair already has the label the attack aims for


class TraceRecord(NamedTuple):
    query: int
    best_l2: float
    best_linf: float | None
    clean_query: bool
    detected: bool


@dataclass
class AttackTrace:
    """Best-so-far perturbation norms against the oracle's query counter.

    ``best_l2`` never increases across records. For query wrappers that report
    only noise-free checks (evasion), the recorded values and ``best_image``
    come from those checks rather than from the engine's internal state.
    """

    records: list[TraceRecord] = field(default_factory=list)
    best_point: np.ndarray | None = None
    best_image: np.ndarray | None = None
    status: str = INIT_FAILED
    _seen_detections: int = 0
    _spent: int = 0

    def log(self, oracle, l2: float, linf: float | None = None) -> None:
        rep = oracle.reported()
        if rep is not None:
            l2, linf = rep.l2, rep.linf
        if self.records:
            prev = self.records[-1]
            l2 = min(l2, prev.best_l2)
            if linf is not None and prev.best_linf is not None:
                linf = min(linf, prev.best_linf)
        det = oracle.detections > self._seen_detections
        self._seen_detections = oracle.detections
        self._spent = oracle.queries
        self.records.append(TraceRecord(oracle.queries, float(l2),
                                        None if linf is None else float(linf),
                                        bool(oracle.last_clean), det))

    def sync(self, oracle) -> None:
        """Account for queries and detector flags spent outside the engine (e.g. a failed init)."""
        self._seen_detections = oracle.detections
        self._spent = oracle.queries

    def finish(self, oracle, point: np.ndarray, image: np.ndarray, status: str,
               l2: float, linf: float | None = None) -> "AttackTrace":
        if not self.records or self.records[-1].query != oracle.queries:
            self.log(oracle, l2, linf)
        rep = oracle.reported()
        if rep is not None:
            point, image = rep.point, rep.image
        self.best_point = point
        self.best_image = image
        self.status = status
        return self

    @property
    def queries(self) -> int:
        return max(self._spent, self.records[-1].query if self.records else 0)

    @property
    def detections(self) -> int:
        """Detector flags raised up to the last record (init queries included)."""
        return self._seen_detections

    @property
    def final_l2(self) -> float:
        return self.records[-1].best_l2 if self.records else float("inf")
