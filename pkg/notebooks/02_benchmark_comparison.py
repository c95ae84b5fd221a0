"""
MTGA against single-task and multifactorial baselines
=====================================================

Runs the three solvers on one benchmark pair, prints final errors, and
computes the performance score that ranks them (lower is better). The same
experiment can be launched from the command line with a JSON config; see the
README.
"""

import numpy as np
import matplotlib.pyplot as plt

from mtga import SolverConfig, load_task_pair, performance_score, summarize_runs
from mtga.solvers import SOLVERS

# A reduced budget keeps this quick. The full protocol uses 100,000
# evaluations, 500 generations and 20 repetitions.
tasks = load_task_pair("B4")
config = SolverConfig(pop_size=100, generations=100, n_t=40, eval_budget=20_000)
seeds = range(5)

traces = {name: [SOLVERS[name](tasks, config, s) for s in seeds] for name in ("mtga", "soea", "mfea")}

# %%
# Mean and sample standard deviation of the final error on each task.
for name, runs in traces.items():
    s = summarize_runs(runs)
    print(f"{name:5s} mean {np.array2string(s.mean, precision=3)}  std {np.array2string(s.std, precision=3)}")

# %%
# Performance score over both tasks and all repetitions.
B = [[[run.final_best[m] for run in runs] for m in range(2)] for runs in traces.values()]
for name, score in zip(traces, performance_score(B)):
    print(f"score {name:5s} {score:+.3f}")

# %%
# Mean convergence on the first task.
fig, ax = plt.subplots(figsize=(5, 3.5))
for name, runs in traces.items():
    length = min(len(r.best) for r in runs)
    evals = np.mean([r.evaluations[:length] for r in runs], axis=0)
    best = np.mean([r.best_series(0)[:length] for r in runs], axis=0)
    ax.semilogy(evals, best, label=name)
ax.set_xlabel("evaluations")
ax.set_ylabel("mean best error, task 1")
ax.legend()
fig.tight_layout()
plt.show()
