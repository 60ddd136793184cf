"""Sign-flip attack: shrink an l-infinity radius and flip block signs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BudgetExhausted, InvalidArgument
from .resample import nearest_index
from .spaces import SearchSpace
from .trace import BUDGET_EXHAUSTED, SUCCESS, AttackTrace


@dataclass(frozen=True)
class SFAConfig:
    """``reduction_ratio`` sets the sign-block size; shrink and batch constants are multiplicative."""

    reduction_ratio: int = 2
    shrink: float = 0.97
    batch_grow: float = 1.1
    batch_shrink: float = 0.9
    batch_init_frac: float = 0.01
    stop_linf: float = 0.0

    def __post_init__(self):
        if self.reduction_ratio < 1:
            raise InvalidArgument("reduction_ratio must be >= 1")


def _cell_index(dims: tuple[int, int, int], ratio: int) -> tuple[np.ndarray, int]:
    h, w, c = dims
    hr, wr = -(-h // ratio), -(-w // ratio)
    ri = nearest_index(h, hr)
    ci = nearest_index(w, wr)
    cells = (ri[:, None, None] * wr + ci[None, :, None]) * c + np.arange(c)[None, None, :]
    return cells, hr * wr * c


def run_sfa(oracle, space: SearchSpace, init_point: np.ndarray, budget: int,
            cfg: SFAConfig = SFAConfig(), rng: np.random.Generator | None = None,
            trace: AttackTrace | None = None) -> AttackTrace:
    """Alternate radius-shrink and sign-flip trials until the budget is spent.

    The state is a point ``p`` with ``|p| <= eps`` elementwise, starting at
    ``eps = max|init|``. A shrink trial clips ``p`` to ``0.97 eps``; a flip
    trial negates ``p`` on ``b`` random cells of the reduced grid (each cell is
    a ``ratio x ratio`` block of one channel). Either is kept iff adversarial.
    ``b`` grows by 1.1 after a kept flip and shrinks by 0.9 otherwise, within
    ``[1, cells/10]``. Once ``eps`` falls below the initial magnitudes the
    point saturates to ``eps`` times a block sign pattern.

    Trace rows carry ``eps`` as the l-infinity value and the best image-space
    l2 norm among the adversarial states visited; that lowest-l2 state (not
    necessarily the last one) is returned as the trace's best point.
    """
    rng = np.random.default_rng() if rng is None else rng
    trace = AttackTrace() if trace is None else trace
    budget = min(int(budget), oracle.budget)
    if oracle.queries >= budget:
        raise InvalidArgument("budget already spent")

    p = space.project(np.asarray(init_point, dtype=float))
    img, l2 = space.render(p)
    if not oracle.is_adversarial(oracle.verify_clean(img)):
        raise InvalidArgument("initial point is not adversarial")
    eps = float(np.max(np.abs(p)))
    oracle.set_best(img, p, verified=True)
    best_l2 = l2
    best_p, best_img = p, img
    trace.log(oracle, best_l2, eps)

    cells, n_cells = _cell_index(p.shape, cfg.reduction_ratio)
    b_max = max(1.0, n_cells / 10)
    batch = float(np.clip(n_cells * cfg.batch_init_frac, 1.0, b_max))
    shrink_turn = True
    status = BUDGET_EXHAUSTED
    while oracle.queries < budget:
        if eps <= cfg.stop_linf:
            status = SUCCESS
            break
        if shrink_turn:
            new_eps = eps * cfg.shrink
            cand = np.clip(p, -new_eps, new_eps)
        else:
            new_eps = eps
            chosen = np.zeros(n_cells, dtype=bool)
            chosen[rng.choice(n_cells, size=int(round(batch)), replace=False)] = True
            cand = np.where(chosen[cells], -p, p)
        cimg, cl2 = space.render(cand)
        try:
            label = oracle.verify(cimg)
        except BudgetExhausted:
            break
        adv = oracle.is_adversarial(label)
        if not shrink_turn:
            batch = float(np.clip(batch * (cfg.batch_grow if adv else cfg.batch_shrink), 1.0, b_max))
        if adv:
            p, img, eps = cand, cimg, new_eps
            if cl2 < best_l2:
                best_l2, best_p, best_img = cl2, p, img
                oracle.set_best(img, p)
        trace.log(oracle, best_l2, eps)
        shrink_turn = not shrink_turn
    return trace.finish(oracle, best_p, best_img, status, best_l2, eps)
