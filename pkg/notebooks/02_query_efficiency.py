"""
Query efficiency: pixel space, UV space, dictionary starts
==========================================================

Runs EA, EAG and EAGD over one dodging sequence and plots the median
best-so-far l2 norm against the number of queries.
"""

# %%
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gada.attacks import EAConfig
from gada.harness import (ExperimentConfig, attacked, calibrate_verifier, gen_data, run_sequence,
                          summarize)
from gada.oracle import VerifierConfig

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
BUDGET = 1000

verifier, _ = calibrate_verifier(VerifierConfig())
data = gen_data(0, 10, verifier=verifier)
grid = np.arange(1, BUDGET + 1)


def curve(trace):
    """Best-so-far norm at every query count (step function of the trace)."""
    q = np.array([r.query for r in trace.records])
    n = np.array([r.best_l2 for r in trace.records])
    at = np.searchsorted(q, grid, side="right") - 1
    return np.where(at >= 0, n[np.maximum(at, 0)], np.inf)  # inf until the start point is found


# %%
fig, a = plt.subplots(figsize=(6, 4))
for attack in ("EA", "EAG", "EAGD"):
    cfg = ExperimentConfig(attack=attack, budget=BUDGET, budgets=[250, 500, 1000],
                           verifier=verifier, ea=EAConfig(reduced_dims=(16, 16, 3)))
    results, _ = run_sequence(cfg, data)
    done = attacked(results)
    s = summarize([r.metrics for r in done])
    print(attack, "median norm@250/500/1000:", np.round(s.median_norms, 3),
          "starts:", [r.init for r in done])
    a.plot(grid, np.median([curve(r.trace) for r in done], axis=0), label=attack)
a.set_xlabel("queries")
a.set_ylabel("median best l2")
a.set_yscale("log")
a.legend()
fig.savefig(OUT / "norm_curves.png", dpi=100)
