"""Real-coded GA variation and survivor selection.

All operators act on normalized genes in ``[0, 1]`` and accept either single
chromosomes (1-D arrays) or whole batches (2-D arrays, one row per pair or
individual). Randomness always comes from an explicit ``numpy`` Generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import MINIMIZE, Population, sort_order


@dataclass(frozen=True)
class SbxParams:
    beta: float = 2.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("SBX distribution index must be positive")


@dataclass(frozen=True)
class MutationParams:
    """Polynomial mutation settings.

    ``per_gene_rate=None`` means ``1/d`` for a ``d``-gene chromosome.
    """

    eta: float = 5.0
    per_gene_rate: Optional[float] = None

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("mutation index eta must be positive")
        if self.per_gene_rate is not None and not 0.0 <= self.per_gene_rate <= 1.0:
            raise ValueError("per_gene_rate must lie in [0, 1]")

    def rate(self, d: int) -> float:
        return 1.0 / d if self.per_gene_rate is None else self.per_gene_rate


def sbx_spread(r, beta: float) -> np.ndarray:
    """Spread factor ``c`` for uniform draws ``r``."""
    r = np.asarray(r, dtype=float)
    low = r <= 0.5
    # np.where evaluates both branches; keep each base strictly positive
    c_low = np.power(2.0 * np.where(low, r, 0.5), 1.0 / (beta + 1.0))
    c_high = np.power(2.0 * (1.0 - np.where(low, 0.5, r)), -1.0 / (beta + 1.0))
    return np.where(low, c_low, c_high)


def sbx_crossover(x_a, x_b, params: SbxParams = SbxParams(), rng: np.random.Generator = None,
                  r=None, clip: bool = True):
    """Simulated binary crossover of two parents (or two aligned batches).

    A fresh ``r`` is drawn for every gene unless ``r`` is given. Returns the
    offspring ``(x_e, x_f)``; ``x_e`` stays nearer to ``x_a``.
    """
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    if x_a.shape != x_b.shape:
        raise ValueError(f"parent shapes differ: {x_a.shape} vs {x_b.shape}")
    if r is None:
        r = rng.random(x_a.shape)
    c = sbx_spread(r, params.beta)
    x_e = 0.5 * ((1.0 + c) * x_a + (1.0 - c) * x_b)
    x_f = 0.5 * ((1.0 + c) * x_b + (1.0 - c) * x_a)
    if clip:
        np.clip(x_e, 0.0, 1.0, out=x_e)
        np.clip(x_f, 0.0, 1.0, out=x_f)
    return x_e, x_f


def mutation_step(x, r, eta: float, lower=0.0, upper=1.0) -> np.ndarray:
    """Polynomial mutation of every gene of ``x`` with draws ``r`` (no clipping)."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    low = r <= 0.5
    down = (np.power(2.0 * np.where(low, r, 0.5), 1.0 / (1.0 + eta)) - 1.0) * (x - lower)
    up = (1.0 - np.power(2.0 * (1.0 - np.where(low, 0.5, r)), 1.0 / (1.0 + eta))) * (upper - x)
    return x + np.where(low, down, up)


def polynomial_mutation(x, params: MutationParams = MutationParams(), rng: np.random.Generator = None,
                        r=None, u=None) -> np.ndarray:
    """Mutate each gene with probability ``params.rate(d)``; clamp to ``[0, 1]``.

    ``u`` decides which genes mutate (``u < rate``), ``r`` drives the step.
    Both are drawn for every gene, mutated or not, so the random stream
    consumed per call depends only on the shape of ``x``.
    """
    x = np.asarray(x, dtype=float)
    if u is None:
        u = rng.random(x.shape)
    if r is None:
        r = rng.random(x.shape)
    rate = params.rate(x.shape[-1])
    mutated = mutation_step(x, r, params.eta)
    out = np.where(np.asarray(u) < rate, mutated, x)
    return np.clip(out, 0.0, 1.0)


def elitist_select(parents: Population, offspring: Population, direction: str = MINIMIZE) -> Population:
    """Keep the ``len(parents)`` best of parents + offspring, sorted best first.

    Ties keep pool order, parents ahead of offspring.
    """
    n = len(parents)
    genes = np.vstack([parents.genes, offspring.genes])
    fitness = np.concatenate([parents.fitness, offspring.fitness])
    order = sort_order(fitness, direction)[:n]
    return Population(parents.task_id, genes[order], fitness[order])
