"""Run attack variants over a synthetic image sequence."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np

from ..attacks import (BUDGET_EXHAUSTED, EAGR, EAR, INIT_FAILED, SKIPPED, AttackTrace, EAConfig, SFAConfig,
                       init_dodging, init_impersonation, init_impersonation_image,
                       make_image_space, make_uv_space, run_ea, run_sfa, wrap_with_evasion)
from ..detector import DetectingOracle, StatefulDetector
from ..dictionary import FULL, RANDOM_FETCH, SINGLE_SLOT, Dictionary, scale_until_adversarial
from ..errors import BudgetExhausted, InitFailed, InvalidArgument
from ..oracle import HardLabelOracle, VerifierConfig, surrogate_feature
from .data import Dataset
from .metrics import MetricsRow, compute_metrics

log = logging.getLogger(__name__)

DODGING = "dodging"
IMPERSONATION = "impersonation"


class Variant(NamedTuple):
    engine: str          # "ea" | "sfa"
    geometric: bool      # search in UV space
    policy: str | None   # dictionary policy, None = no dictionary
    evasion: str | None  # EAR | EAGR | None


VARIANTS = {
    "EA": Variant("ea", False, None, None),
    "EAD": Variant("ea", False, FULL, None),
    "EAG": Variant("ea", True, None, None),
    "EAGD": Variant("ea", True, FULL, None),
    "EAGD1": Variant("ea", True, SINGLE_SLOT, None),
    "EAGDR": Variant("ea", True, RANDOM_FETCH, None),
    "SFA": Variant("sfa", False, None, None),
    "SFAD": Variant("sfa", False, FULL, None),
    "SFAG": Variant("sfa", True, None, None),
    "SFAGD": Variant("sfa", True, FULL, None),
    "EAR": Variant("ea", False, None, EAR),
    "EAGR": Variant("ea", True, None, EAGR),
}


@dataclass
class DetectorSettings:
    enabled: bool = False
    threshold: float = 0.0
    k: int = 50
    capacity: int = 100


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one attack run over a sequence."""

    attack: str = "EA"
    mode: str = DODGING
    budget: int = 10_000
    budgets: list[int] = field(default_factory=lambda: [1000, 2000, 5000, 10000])
    thresholds: list[float] = field(default_factory=lambda: [4, 2])
    seed: int = 0
    uv_dims: tuple[int, int] | None = None
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    ea: EAConfig = field(default_factory=EAConfig)
    sfa: SFAConfig = field(default_factory=SFAConfig)
    detector: DetectorSettings = field(default_factory=DetectorSettings)
    clean_interval: int = 20
    max_resamples: int = 50
    dict_k_max: int = 30

    def __post_init__(self):
        if self.attack not in VARIANTS:
            raise InvalidArgument(f"unknown attack {self.attack!r}")
        if self.mode not in (DODGING, IMPERSONATION):
            raise InvalidArgument(f"unknown mode {self.mode!r}")
        if self.mode == IMPERSONATION and VARIANTS[self.attack].policy is not None:
            raise InvalidArgument("dictionary variants are dodging-only")

    @property
    def variant(self) -> Variant:
        return VARIANTS[self.attack]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "verifier" in d:
            v = dict(d["verifier"])
            for k in ("pool", "ellipse_center", "ellipse_radii"):
                if k in v:
                    v[k] = tuple(v[k])
            d["verifier"] = VerifierConfig(**v)
        if "ea" in d:
            e = dict(d["ea"])
            if "reduced_dims" in e:
                e["reduced_dims"] = tuple(e["reduced_dims"])
            d["ea"] = EAConfig(**e)
        if "sfa" in d:
            d["sfa"] = SFAConfig(**d["sfa"])
        if "detector" in d:
            d["detector"] = DetectorSettings(**d["detector"])
        if d.get("uv_dims") is not None:
            d["uv_dims"] = tuple(d["uv_dims"])
        return cls(**d)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ImageResult:
    image_id: str
    trace: AttackTrace
    metrics: MetricsRow
    init: str              # how the start point was obtained
    oracle: HardLabelOracle
    space_kind: str


def image_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def attack_image(cfg: ExperimentConfig, data: Dataset, index: int,
                 dictionary: Dictionary | None = None) -> ImageResult:
    """Attack pair ``index`` of ``data`` once with ``cfg``; updates ``dictionary`` in place."""
    var = cfg.variant
    rng = image_rng(cfg.seed, index)
    if cfg.mode == DODGING:
        a_idx = data.left(index)
    else:
        a_idx = data.left(int(data.perm[index]))
    x_a = data.images[a_idx]
    enrolled = data.images[data.right(index)]
    base = HardLabelOracle(cfg.verifier, enrolled, x_a, cfg.budget)
    oracle = base
    if cfg.detector.enabled:
        oracle = DetectingOracle(oracle, StatefulDetector(cfg.detector.threshold, cfg.detector.k,
                                                          cfg.detector.capacity))
    image_space = make_image_space(x_a)
    uv_space = make_uv_space(x_a, data.model, data.params[a_idx], cfg.uv_dims) if var.geometric \
        else None
    space = uv_space if var.geometric else image_space
    if var.evasion is not None:
        raster = uv_space.raster if uv_space is not None else \
            make_uv_space(x_a, data.model, data.params[a_idx]).raster
        oracle = wrap_with_evasion(oracle, raster, var.evasion, cfg.clean_interval, rng)

    trace = AttackTrace()
    image_id = f"img{index}"
    wanted = 1 if cfg.mode == DODGING else 0
    if base.original_label != wanted:
        log.info("image %d: unmodified pair already has label %d, skipped", index, base.original_label)
        trace.status = SKIPPED
        row = compute_metrics(trace, cfg.budgets, cfg.thresholds, cfg.budget, image_id, cfg.attack)
        return ImageResult(image_id, trace, row, "none", base, space.kind)

    init_kind = "random"
    point = None
    key = None
    try:
        if cfg.mode == DODGING and var.policy is not None and dictionary is not None:
            key = surrogate_feature(x_a)
            entry = dictionary.fetch(key, rng)
            if entry is not None and np.any(entry.perturbation):
                clipped = space.with_clip_rule(True)
                hit = scale_until_adversarial(oracle, clipped, entry.perturbation,
                                              k_max=cfg.dict_k_max)
                if hit is not None:
                    point, space, init_kind = hit[0], clipped, f"dictionary(k={hit[1]})"
        if point is None and cfg.mode == DODGING:
            point = init_dodging(space, oracle, rng, cfg.max_resamples)
        elif point is None:
            src = data.left(index)
            if var.geometric:
                point = init_impersonation(space, data.images[src], data.verts(src), oracle, rng)
                init_kind = "face-swap"
            if point is None:
                space = image_space
                init_kind = "source-image"
                point = init_impersonation_image(space, data.images[src], oracle)
    except (InitFailed, BudgetExhausted) as exc:
        log.info("image %d: init failed (%s)", index, exc)
        trace.sync(oracle)
        point = None

    if point is not None and base.remaining <= 0:
        # the start point used the whole budget; nothing left to verify or refine it
        trace.sync(oracle)
        trace.best_point, trace.status = point, BUDGET_EXHAUSTED
    elif point is not None:
        run = run_ea if var.engine == "ea" else run_sfa
        ecfg = cfg.ea if var.engine == "ea" else cfg.sfa
        trace = run(oracle, space, point, cfg.budget, ecfg, rng=rng, trace=trace)
        if key is not None and dictionary is not None:
            dictionary.store(key, trace.best_point)
    else:
        trace.status = INIT_FAILED

    row = compute_metrics(trace, cfg.budgets, cfg.thresholds, cfg.budget, image_id, cfg.attack)
    return ImageResult(image_id, trace, row, init_kind, base, space.kind)


def run_sequence(cfg: ExperimentConfig, data: Dataset, dictionary: Dictionary | None = None,
                 indices=None, on_image=None) -> tuple[list[ImageResult], Dictionary | None]:
    """Attack every pair in order, threading one dictionary through the sequence.

    ``on_image(result, dictionary)`` is called after each image (for
    checkpointing).
    """
    var = cfg.variant
    if var.policy is not None and dictionary is None:
        dictionary = Dictionary(var.policy)
    results = []
    for i in (range(data.n_pairs) if indices is None else indices):
        res = attack_image(cfg, data, i, dictionary)
        results.append(res)
        log.info("%s %s: %s, %s, final l2 %.4f after %d queries", cfg.attack, res.image_id,
                 res.init, res.trace.status, res.trace.final_l2, res.trace.queries)
        if on_image is not None:
            on_image(res, dictionary)
    return results, dictionary


def attacked(results: list[ImageResult]) -> list[ImageResult]:
    """Results whose pair met the attack precondition (skipped pairs removed)."""
    return [r for r in results if r.trace.status != SKIPPED]


def with_attack(cfg: ExperimentConfig, attack: str, **changes) -> ExperimentConfig:
    return replace(cfg, attack=attack, **changes)
