import numpy as np
import pytest

from gada.attacks.trace import TraceRecord
from gada.harness import (compute_metrics, read_metrics_csv, read_trace_csv, summarize,
                          write_metrics_csv, write_summary_csv, write_trace_csv)

B = [1000, 2000, 5000, 10000]
T = [4, 2]


def _rec(q, n, linf=None):
    return TraceRecord(q, n, linf, False, False)


EXAMPLE = [_rec(500, 10.0), _rec(1500, 3.9), _rec(4000, 1.8)]


def test_example_row(tmp_path):
    row = compute_metrics(EXAMPLE, B, T, 10000, "img0", "EA")
    assert row.norms == [10.0, 3.9, 1.8, 1.8]
    assert row.queries_to == [1500, 4000]
    write_metrics_csv([row], tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_bytes().decode("utf-8").split("\n")
    assert lines[0] == "image,attack,norm@1000,norm@2000,norm@5000,norm@10000,queries_to@4,queries_to@2,detections"
    assert lines[1] == "img0,EA,10.0,3.9,1.8,1.8,1500,4000,0"
    assert lines[2] == ""


def test_censoring():
    row = compute_metrics([_rec(1, 9.0), _rec(9000, 3.0)], B, T, 10000)
    assert row.queries_to == [9000, 10000]


def test_single_record():
    row = compute_metrics([_rec(1, 2.5)], B, T, 10000)
    assert row.norms == [2.5] * 4


def test_no_records_within_budget():
    row = compute_metrics([_rec(1500, 2.5)], B, T, 10000)
    assert row.norms[0] == float("inf") and row.norms[1] == 2.5


def test_norms_non_increasing_in_budget():
    rng = np.random.default_rng(0)
    q = np.sort(rng.choice(10000, 50, replace=False)) + 1
    n = np.sort(rng.uniform(0, 20, 50))[::-1]
    row = compute_metrics([_rec(int(a), float(b)) for a, b in zip(q, n)], B, T, 10000)
    assert all(b <= a for a, b in zip(row.norms, row.norms[1:]))


def test_detections_counted_from_records():
    recs = [TraceRecord(1, 3.0, None, False, True), TraceRecord(2, 2.0, None, False, False),
            TraceRecord(3, 1.0, None, False, True)]
    assert compute_metrics(recs, B, T, 10).detections == 2


def test_empty_trace_header_only(tmp_path):
    write_trace_csv([], tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text(encoding="utf-8") == "query,best_l2,best_linf,clean_query,detected\n"
    assert read_trace_csv(tmp_path / "t.csv") == []


def test_trace_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    recs = [TraceRecord(i + 1, float(rng.random() * 10), None if i % 2 else float(rng.random()),
                        bool(i % 3 == 0), bool(i % 5 == 0)) for i in range(50)]
    recs.append(TraceRecord(51, float(np.float32(0.1)), 1e-300, True, False))
    write_trace_csv(recs, tmp_path / "t.csv")
    assert read_trace_csv(tmp_path / "t.csv") == recs
    assert b"\r" not in (tmp_path / "t.csv").read_bytes()


def test_metrics_round_trip(tmp_path):
    rows = [compute_metrics(EXAMPLE, B, T, 10000, f"img{i}", "EAG", detections=i) for i in range(3)]
    rows.append(compute_metrics([_rec(3000, 5.0)], B, T, 10000, "img9", "EAG"))
    write_metrics_csv(rows, tmp_path / "m.csv")
    assert read_metrics_csv(tmp_path / "m.csv") == rows


def test_write_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "t.csv"
    with pytest.raises(OSError, match="missing"):
        write_trace_csv(EXAMPLE, bad)


def test_summary_means_match_direct(tmp_path):
    rng = np.random.default_rng(2)
    rows = []
    for i in range(7):
        recs = sorted({int(q) for q in rng.integers(1, 10000, 5)})
        norms = np.sort(rng.uniform(0.5, 12, len(recs)))[::-1]
        rows.append(compute_metrics([_rec(q, float(n)) for q, n in zip(recs, norms)], B, T, 10000,
                                    f"img{i}", "EA", detections=int(rng.integers(0, 5))))
    s = summarize(rows)
    assert s.n_images == 7
    for j in range(len(B)):
        assert s.mean_norms[j] == pytest.approx(sum(r.norms[j] for r in rows) / 7, rel=1e-15)
        assert s.median_norms[j] == sorted(r.norms[j] for r in rows)[3]
    for j in range(len(T)):
        assert s.mean_queries_to[j] == pytest.approx(sum(r.queries_to[j] for r in rows) / 7)
    assert s.mean_detections == pytest.approx(sum(r.detections for r in rows) / 7)
    write_summary_csv([s], tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0].startswith("attack,n_images,mean_norm@1000") and lines[1].startswith("EA,7,")


def test_summarize_empty():
    assert summarize([]).n_images == 0
