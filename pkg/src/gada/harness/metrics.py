"""Query-efficiency metrics and CSV emission."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from ..attacks.trace import AttackTrace, TraceRecord

TRACE_HEADER = ["query", "best_l2", "best_linf", "clean_query", "detected"]


@dataclass
class MetricsRow:
    """Norm reached within each budget and queries needed for each norm threshold."""

    image_id: str
    attack: str
    budgets: list[int]
    norms: list[float]
    thresholds: list[float]
    queries_to: list[int]
    detections: int = 0

    def header(self) -> list[str]:
        return (["image", "attack"] + [f"norm@{b}" for b in self.budgets]
                + [f"queries_to@{_num(t)}" for t in self.thresholds] + ["detections"])

    def cells(self) -> list[str]:
        return ([self.image_id, self.attack] + [_num(v) for v in self.norms]
                + [str(q) for q in self.queries_to] + [str(self.detections)])


def _num(v: float) -> str:
    """Shortest round-trip decimal (``repr``) for floats; integers stay integral."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def compute_metrics(trace: AttackTrace | list[TraceRecord], budgets, thresholds, q_max: int,
                    image_id: str = "", attack: str = "", detections: int | None = None) -> MetricsRow:
    """``norm@B`` is the best l2 among records with query <= B (inf if none);
    ``queries_to(t)`` is the first query whose best l2 <= t, censored at ``q_max``.
    """
    records = trace.records if isinstance(trace, AttackTrace) else list(trace)
    if detections is None:
        detections = trace.detections if isinstance(trace, AttackTrace) else \
            sum(r.detected for r in records)
    norms = []
    for b in budgets:
        within = [r.best_l2 for r in records if r.query <= b]
        norms.append(min(within) if within else float("inf"))
    qs = []
    for t in thresholds:
        hit = [r.query for r in records if r.best_l2 <= t]
        qs.append(min(hit) if hit else int(q_max))
    return MetricsRow(image_id, attack, list(budgets), norms, list(thresholds), qs, int(detections))


def write_trace_csv(records, path: str | os.PathLike) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for r in records:
                w.writerow([r.query, _num(r.best_l2), "" if r.best_linf is None else _num(r.best_linf),
                            int(r.clean_query), int(r.detected)])
    except OSError as exc:
        raise OSError(f"cannot write trace CSV {os.fspath(path)!r}: {exc}") from exc


def read_trace_csv(path: str | os.PathLike) -> list[TraceRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [TraceRecord(int(r["query"]), float(r["best_l2"]),
                        None if r["best_linf"] == "" else float(r["best_linf"]),
                        bool(int(r["clean_query"])), bool(int(r["detected"]))) for r in rows]


def write_metrics_csv(rows: list[MetricsRow], path: str | os.PathLike) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if rows:
                w.writerow(rows[0].header())
            for row in rows:
                w.writerow(row.cells())
    except OSError as exc:
        raise OSError(f"cannot write metrics CSV {os.fspath(path)!r}: {exc}") from exc


def read_metrics_csv(path: str | os.PathLike) -> list[MetricsRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        budgets = [int(h.split("@")[1]) for h in header if h.startswith("norm@")]
        thresholds = [float(h.split("@")[1]) for h in header if h.startswith("queries_to@")]
        nb, nt = len(budgets), len(thresholds)
        out = []
        for cells in reader:
            out.append(MetricsRow(cells[0], cells[1], budgets,
                                  [float(c) for c in cells[2:2 + nb]], thresholds,
                                  [int(c) for c in cells[2 + nb:2 + nb + nt]], int(cells[-1])))
    return out


@dataclass
class Summary:
    attack: str
    n_images: int
    budgets: list[int] = field(default_factory=list)
    thresholds: list[float] = field(default_factory=list)
    mean_norms: list[float] = field(default_factory=list)
    median_norms: list[float] = field(default_factory=list)
    mean_queries_to: list[float] = field(default_factory=list)
    mean_detections: float = 0.0

    def header(self) -> list[str]:
        return (["attack", "n_images"] + [f"mean_norm@{b}" for b in self.budgets]
                + [f"median_norm@{b}" for b in self.budgets]
                + [f"mean_queries_to@{_num(t)}" for t in self.thresholds] + ["mean_detections"])

    def cells(self) -> list[str]:
        return ([self.attack, str(self.n_images)] + [_num(v) for v in self.mean_norms]
                + [_num(v) for v in self.median_norms] + [_num(v) for v in self.mean_queries_to]
                + [_num(self.mean_detections)])


def summarize(rows: list[MetricsRow]) -> Summary:
    """Arithmetic means (and medians) of per-image metrics for one attack."""
    if not rows:
        return Summary("", 0)
    norms = np.array([r.norms for r in rows], dtype=float)
    qs = np.array([r.queries_to for r in rows], dtype=float)
    return Summary(rows[0].attack, len(rows), list(rows[0].budgets), list(rows[0].thresholds),
                   norms.mean(axis=0).tolist(), np.median(norms, axis=0).tolist(),
                   qs.mean(axis=0).tolist(), float(np.mean([r.detections for r in rows])))


def write_summary_csv(summaries: list[Summary], path: str | os.PathLike) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if summaries:
                w.writerow(summaries[0].header())
            for s in summaries:
                w.writerow(s.cells())
    except OSError as exc:
        raise OSError(f"cannot write summary CSV {os.fspath(path)!r}: {exc}") from exc
