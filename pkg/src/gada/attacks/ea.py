"""(1+1) evolution strategy for decision-based minimum-norm attacks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BudgetExhausted, InvalidArgument
from .resample import upsample_bilinear
from .spaces import SearchSpace
from .trace import BUDGET_EXHAUSTED, SUCCESS, AttackTrace


@dataclass(frozen=True)
class EAConfig:
    """Search hyperparameters.

    ``reduced_dims`` is the sampling grid (upsampled bilinearly to the point
    grid); each step has length ``sigma_coeff`` times the norm of the current
    point, measured in the point's own space (texture or pixels).
    ``mu0`` is the initial pull towards the unperturbed image, adapted so the
    smoothed success rate tracks ``target_rate``.
    """

    reduced_dims: tuple[int, int, int] = (60, 60, 3)
    sigma_coeff: float = 0.03
    mu0: float = 0.01
    decay: float = 0.97
    cc: float = 0.001
    target_rate: float = 0.2
    mu_lr: float = 0.01
    mu_min: float = 1e-4
    mu_max: float = 0.5
    stop_norm: float = 0.0

    def __post_init__(self):
        if not self.sigma_coeff > 0:
            raise InvalidArgument("sigma_coeff must be > 0")
        if min(self.reduced_dims) < 1:
            raise InvalidArgument("reduced_dims must be >= 1")


def run_ea(oracle, space: SearchSpace, init_point: np.ndarray, budget: int,
           cfg: EAConfig = EAConfig(), rng: np.random.Generator | None = None,
           trace: AttackTrace | None = None) -> AttackTrace:
    """Shrink an adversarial perturbation until ``oracle.queries`` reaches ``budget``.

    The first query re-checks ``init_point``. Every later query tests
    ``x + sigma ||x|| z/||z|| - mu x`` with ``z`` drawn from the diagonal Gaussian
    on the reduced grid; the candidate replaces ``x`` only if it is adversarial
    and has a smaller norm. Accepted draws pull the diagonal covariance
    towards their squared (mean-normalized) coordinates.
    """
    rng = np.random.default_rng() if rng is None else rng
    trace = AttackTrace() if trace is None else trace
    budget = min(int(budget), oracle.budget)
    if oracle.queries >= budget:
        raise InvalidArgument("budget already spent")

    x = space.project(np.asarray(init_point, dtype=float))
    img, norm = space.render(x)
    if not oracle.is_adversarial(oracle.verify_clean(img)):
        raise InvalidArgument("initial point is not adversarial")
    oracle.set_best(img, x, verified=True)
    trace.log(oracle, norm)

    shape = x.shape[:2]
    rd = tuple(cfg.reduced_dims)
    if rd[2] != x.shape[2]:
        raise InvalidArgument("reduced_dims channel count must match the point")
    cov = np.ones(rd)
    mu = cfg.mu0
    rate = cfg.target_rate
    status = BUDGET_EXHAUSTED
    while oracle.queries < budget:
        if norm <= cfg.stop_norm:
            status = SUCCESS
            break
        z = rng.standard_normal(rd) * np.sqrt(cov)
        zu = upsample_bilinear(z, shape)
        zn = np.linalg.norm(zu)
        step = (cfg.sigma_coeff * np.linalg.norm(x) / zn) * zu if zn > 0 else 0.0
        cand = space.project(x + step - mu * x)
        cimg, cnorm = space.render(cand)
        try:
            label = oracle.verify(cimg)
        except BudgetExhausted:
            break
        adv = oracle.is_adversarial(label)
        rate = cfg.decay * rate + (1 - cfg.decay) * adv
        mu = float(np.clip(mu * np.exp(cfg.mu_lr * (rate - cfg.target_rate)), cfg.mu_min, cfg.mu_max))
        if adv and cnorm < norm:
            x, img, norm = cand, cimg, cnorm
            z2 = z * z
            cov = (1 - cfg.cc) * cov + cfg.cc * z2 / z2.mean()
            oracle.set_best(img, x)
        trace.log(oracle, norm)
    return trace.finish(oracle, x, img, status, norm)
