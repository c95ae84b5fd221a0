"""
Designing type-1 and interval type-2 level controllers together
================================================================

The coupled-tank plant is controlled by a fuzzy PI controller. One task
tunes a 17-gene type-1 controller, the other a 23-gene interval type-2
controller, and MTGA lets them exchange chromosomes through a fixed gene
matching: means to means, type-1 widths to the lower type-2 widths, and
consequents to consequents.
"""

import numpy as np
import matplotlib.pyplot as plt

from mtga import SolverConfig, run_mtga
from mtga.fuzzy import IT2, T1, enforce_flc_constraints, flc_gene_matching
from mtga.tank import EPSILON, flc_tasks, plant_configs, simulate_closed_loop

tasks = flc_tasks()
# Fewer generations than the acceptance run so the demo finishes in about a minute.
config = SolverConfig(pop_size=100, generations=40, n_t=40, eval_budget=2 * 100 * 41,
                      matching="fixed", fixed_tables=flc_gene_matching())
trace = run_mtga(tasks, config, seed=0)

for m, kind in enumerate((T1, IT2)):
    print(f"{kind:3s} weighted ITAE {1 / trace.final_best[m] - EPSILON:.0f}")

# %%
# Decode the best chromosome of each task and simulate all four plants.
controllers = [enforce_flc_constraints(trace.best_point[m], kind) for m, kind in enumerate((T1, IT2))]
titles = ["nominal", "2 s input delay", "setpoint 22.5 then 7.5", "weaker baffle"]
fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
for ax, plant, title in zip(axes.flat, plant_configs(), titles):
    for flc in controllers:
        sim = simulate_closed_loop(flc, plant)
        ax.plot(sim.time, sim.H2, label=f"{flc.kind}, ITAE {sim.itae():.0f}")
    ax.plot(sim.time, sim.setpoint, "k--", lw=0.8)
    ax.set_title(title)
    ax.legend(fontsize=8)
for ax in axes[1]:
    ax.set_xlabel("time (s)")
for ax in axes[:, 0]:
    ax.set_ylabel("H2 (cm)")
fig.tight_layout()
plt.show()

# %%
# The consequent values of both controllers, sorted as the repair enforces.
for flc in controllers:
    print(flc.kind, np.round(flc.consequents, 3))
