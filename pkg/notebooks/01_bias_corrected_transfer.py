"""
Moving chromosomes between two tasks
====================================

Two one-dimensional tasks, a Sphere and an Ackley function, have their optima
at different places. Copying the fittest Sphere chromosomes straight into the
Ackley population would drop them far from anything useful. Subtracting the
donor population's mean and adding the target population's mean moves them
next to the target's own good region instead.
"""

import numpy as np
import matplotlib.pyplot as plt

from mtga import ComposedTask, Population, build_transfer_population, sort_population
from mtga.transfer import estimate_bias

rng = np.random.default_rng(0)

# Two shifted landscapes on different ranges. Genes live in [0, 1].
sphere = ComposedTask("sphere", [30.0], lower=-100, upper=100).task("sphere")
ackley = ComposedTask("ackley", [-20.0], lower=-50, upper=50).task("ackley")

# %%
# Pretend both populations have been evolving for a while: their members
# cluster near each task's optimum (0.65 and 0.3 in normalized units).
def evolved(task, centre, n=10):
    genes = np.clip(centre + 0.04 * rng.standard_normal((n, 1)), 0, 1)
    return sort_population(Population(task.id, genes, task.evaluate(genes)))

donor = evolved(sphere, 0.65)
target = evolved(ackley, 0.30)

# %%
# The bias is estimated from the mean of the four fittest members of each
# population, then four donors are transferred.
bias = estimate_bias(donor, target, n_t=4)
print("donor mean", bias.mean_source, "target mean", bias.mean_target)

pool = build_transfer_population(target, donor, bias, n_t=4, mode="fixed", fixed_table=[0])
moved = pool.genes[:4, 0]
print("transferred genes", moved.round(3))
print("naive copies     ", donor.genes[:4, 0].round(3))

# %%
# Draw both landscapes in normalized coordinates with the donors, the naive
# copies and the corrected transfers.
u = np.linspace(0, 1, 400)[:, None]
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
axes[0].plot(u, sphere.evaluate(u))
axes[0].plot(donor.genes[:4, 0], sphere.evaluate(donor.genes[:4]), "o", label="fittest donors")
axes[0].set_title("Sphere (donor)")
axes[1].plot(u, ackley.evaluate(u))
axes[1].plot(donor.genes[:4, 0], ackley.evaluate(donor.genes[:4]), "x", label="copied as is")
axes[1].plot(moved, ackley.evaluate(pool.genes[:4]), "o", label="bias corrected")
axes[1].set_title("Ackley (target)")
for ax in axes:
    ax.set_xlabel("normalized gene")
    ax.legend()
fig.tight_layout()
plt.show()
