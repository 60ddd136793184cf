"""Command-line entry point: ``gada <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .detector import calibrate
from .dictionary import Dictionary
from .errors import InvalidArgument
from .facemodel import FaceModel, generate_synthetic_model
from .harness.data import (DEFAULT_IMAGE_DIMS, MODEL_GRID, MODEL_N_EXP, MODEL_N_ID, MODEL_SEED,
                           Dataset, calibrate_verifier, default_model, gen_data)
from .harness.experiment import (DetectorSettings, ExperimentConfig, attacked, run_sequence)
from .harness.metrics import (read_metrics_csv, summarize, write_metrics_csv, write_summary_csv,
                              write_trace_csv)
from .oracle import VerifierConfig

log = logging.getLogger("gada")

MODEL_FILE = "model.tensors"
DATA_FILE = "dataset.tensors"
VERIFIER_FILE = "verifier.json"
BENIGN_SEED = 2
BENIGN_PAIRS = 100


def _read_json(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {os.fspath(path)!r}: {exc}") from exc


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen_model(args) -> int:
    conf = _read_json(args.config)
    seed = MODEL_SEED if args.seed is None else args.seed
    model = generate_synthetic_model(seed, conf.get("grid", MODEL_GRID), conf.get("n_id", MODEL_N_ID),
                                     conf.get("n_exp", MODEL_N_EXP))
    path = _out_dir(args.out) / MODEL_FILE
    model.save(path)
    print(f"model: {model.n_vertices} vertices, {len(model.triangles)} triangles -> {path}")
    return 0


def cmd_gen_data(args) -> int:
    conf = _read_json(args.config)
    out = _out_dir(args.out)
    model = FaceModel.load(args.model) if args.model else default_model()
    dims = tuple(conf.get("image_dims", DEFAULT_IMAGE_DIMS))
    verifier = ExperimentConfig.from_dict({"verifier": conf["verifier"]}).verifier \
        if "verifier" in conf else VerifierConfig()
    verifier, acc = calibrate_verifier(verifier, conf.get("calibration_seed", 10_000),
                                       conf.get("calibration_pairs", 100), dims, model)
    seed = 0 if args.seed is None else args.seed
    data = gen_data(seed, args.pairs or conf.get("n_pairs", 20), dims, model, verifier)
    data.threshold = verifier.threshold
    model.save(out / MODEL_FILE)
    data.save(out / DATA_FILE)
    with open(out / VERIFIER_FILE, "w", encoding="utf-8") as fh:
        json.dump(asdict(verifier), fh, indent=2)
    print(f"{data.n_pairs} pairs -> {out}; verifier threshold {verifier.threshold!r} "
          f"(calibration accuracy {acc:.3f})")
    return 0


def _load_data(data_dir) -> tuple[Dataset, dict | None]:
    d = Path(data_dir)
    model = FaceModel.load(d / MODEL_FILE)
    data = Dataset.load(d / DATA_FILE, model)
    ver = _read_json(d / VERIFIER_FILE) if (d / VERIFIER_FILE).exists() else None
    return data, ver


def _experiment(args, data_verifier: dict | None) -> ExperimentConfig:
    conf = _read_json(args.config)
    if "verifier" not in conf and data_verifier is not None:
        conf["verifier"] = data_verifier
    cfg = ExperimentConfig.from_dict(conf)
    changes = {}
    if args.attack is not None:
        changes["attack"] = args.attack
    if args.budget is not None:
        changes["budget"] = args.budget
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "mode", None) is not None:
        changes["mode"] = args.mode
    return replace(cfg, **changes) if changes else cfg


def _write_run(out: Path, cfg: ExperimentConfig, results) -> list:
    (out / "traces").mkdir(exist_ok=True)
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json() + "\n")
    for r in results:
        write_trace_csv(r.trace.records, out / "traces" / f"{cfg.attack}_{r.image_id}.csv")
    with open(out / "status.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image", "attack", "status", "init", "space", "queries"])
        for r in results:
            w.writerow([r.image_id, cfg.attack, r.trace.status, r.init, r.space_kind, r.trace.queries])
    rows = [r.metrics for r in attacked(results)]
    write_metrics_csv(rows, out / "metrics.csv")
    return rows


def _print_summary(rows) -> None:
    s = summarize(rows)
    norms = ", ".join(f"@{b}: mean {m:.4f} median {md:.4f}"
                      for b, m, md in zip(s.budgets, s.mean_norms, s.median_norms))
    print(f"{s.attack}: {s.n_images} images; norm {norms}; mean detections {s.mean_detections:.2f}")


def cmd_attack(args) -> int:
    data, ver = _load_data(args.data)
    cfg = _experiment(args, ver)
    if cfg.detector.enabled and args.detector_threshold is None and cfg.detector.threshold == 0.0:
        log.warning("detector enabled with threshold 0; nothing will be flagged")
    if args.detector_threshold is not None:
        cfg = replace(cfg, detector=DetectorSettings(True, args.detector_threshold,
                                                     cfg.detector.k, cfg.detector.capacity))
    dictionary = None
    if cfg.variant.policy is not None and args.dict and Path(args.dict).exists():
        dictionary = Dictionary.load(args.dict)
        if dictionary.policy != cfg.variant.policy:
            raise InvalidArgument(f"dictionary policy {dictionary.policy!r} does not match "
                                  f"{cfg.attack} ({cfg.variant.policy!r})")
    indices = range(min(args.limit, data.n_pairs)) if args.limit else None
    save_dict = None
    if args.dict and cfg.variant.policy is not None:
        def save_dict(_result, d):
            d.save(args.dict)  # after every image, so an interrupted run can resume
    results, dictionary = run_sequence(cfg, data, dictionary, indices, on_image=save_dict)
    out = _out_dir(args.out)
    rows = _write_run(out, cfg, results)
    _print_summary(rows)
    return 0


def cmd_detect_eval(args) -> int:
    data, ver = _load_data(args.data)
    cfg = _experiment(args, ver)
    threshold = args.detector_threshold
    if threshold is None:
        benign = gen_data(BENIGN_SEED, BENIGN_PAIRS, data.images.shape[1:3], data.model)
        threshold = calibrate(list(benign.images), k=cfg.detector.k, capacity=cfg.detector.capacity)
        print(f"detector threshold calibrated on benign set (seed {BENIGN_SEED}): {threshold!r}")
    cfg = replace(cfg, detector=DetectorSettings(True, float(threshold), cfg.detector.k,
                                                 cfg.detector.capacity))
    indices = range(min(args.limit, data.n_pairs)) if args.limit else None
    results, _ = run_sequence(cfg, data, None, indices)
    rows = _write_run(_out_dir(args.out), cfg, results)
    for r in rows:
        print(f"{r.image_id}: {r.detections} detections, norm@{r.budgets[-1]} {r.norms[-1]:.4f}")
    _print_summary(rows)
    return 0


def cmd_metrics(args) -> int:
    by_attack: dict[str, list] = {}
    for path in args.inputs:
        for row in read_metrics_csv(path):
            by_attack.setdefault(row.attack, []).append(row)
    summaries = [summarize(rows) for rows in by_attack.values()]
    for rows in by_attack.values():
        _print_summary(rows)
    if args.out:
        path = _out_dir(args.out) / "summary.csv"
        write_summary_csv(summaries, path)
        print(f"summary -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gada", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log per-image progress")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", required=out_required, help="output directory")

    sp = sub.add_parser("gen-model", help="write the synthetic morphable face model")
    common(sp)
    sp.set_defaults(func=cmd_gen_model)

    sp = sub.add_parser("gen-data", help="write a synthetic pair dataset and calibrated verifier")
    common(sp)
    sp.add_argument("--pairs", type=int, help="number of identity pairs (default 20)")
    sp.add_argument("--model", help="model tensor file (default: built-in model)")
    sp.set_defaults(func=cmd_gen_data)

    for name, func, helptext in (("attack", cmd_attack, "attack every pair of a dataset"),
                                 ("detect-eval", cmd_detect_eval,
                                  "attack with the stateful detector watching")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--data", required=True, help="directory written by gen-data")
        sp.add_argument("--attack", help="variant name, e.g. EA, EAG, EAGD, SFA, EAGR")
        sp.add_argument("--mode", choices=["dodging", "impersonation"])
        sp.add_argument("--budget", type=int, help="queries per image")
        sp.add_argument("--detector-threshold", type=float)
        sp.add_argument("--limit", type=int, help="attack only the first N pairs")
        if name == "attack":
            sp.add_argument("--dict", help="dictionary file, loaded if present and saved after")
        sp.set_defaults(func=func)

    sp = sub.add_parser("metrics", help="summarize metrics CSVs per attack")
    sp.add_argument("inputs", nargs="+", help="metrics.csv files")
    sp.add_argument("--out", help="directory for summary.csv")
    sp.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"gada {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
