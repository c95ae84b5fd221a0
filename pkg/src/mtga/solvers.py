"""Solver drivers: MTGA, independent single-task GA (SOEA) and MFEA.

Every solver works on normalized genes and minimizes an internal cost
(``task.sign * objective``); traces report objective values in task units.

Random streams: MTGA and SOEA give task ``m`` its own generator
(``make_streams(seed, 2)[m]``). With transfer disabled, MTGA therefore
consumes exactly the draws of two SOEA runs on those streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ConfigError, Population, TaskDefinition, make_streams, sort_population
from .operators import MutationParams, SbxParams, elitist_select, polynomial_mutation, sbx_crossover
from .transfer import RANDOM, BiasEstimate, build_transfer_population, top_mean


@dataclass
class SolverConfig:
    pop_size: int = 100
    generations: int = 500
    n_t: int = 40
    rmp: float = 0.3
    eval_budget: int = 100_000
    sbx: SbxParams = field(default_factory=SbxParams)
    mutation: MutationParams = field(default_factory=MutationParams)
    matching: str = RANDOM
    # fixed_tables[m] is the fixed matching used when transferring *into* task m
    fixed_tables: Optional[Sequence] = None
    recompute_means_per_transfer: bool = False

    def __post_init__(self):
        if self.pop_size < 2 or self.pop_size % 2:
            raise ConfigError("pop_size must be an even integer >= 2")
        if self.generations < 0:
            raise ConfigError("generations must be non-negative")
        if not 0 <= self.n_t <= self.pop_size:
            raise ConfigError("n_t must lie in [0, pop_size]")
        if not 0.0 <= self.rmp <= 1.0:
            raise ConfigError("rmp must lie in [0, 1]")
        if self.eval_budget < 1:
            raise ConfigError("eval_budget must be positive")


@dataclass
class RunTrace:
    """Per-generation convergence record of one run."""

    solver: str
    task_ids: tuple
    seed: int
    generation: list = field(default_factory=list)
    evaluations: list = field(default_factory=list)
    best: list = field(default_factory=list)
    mean: list = field(default_factory=list)
    best_genes: list = field(default_factory=list)
    best_point: list = field(default_factory=list)

    def record(self, k: int, evaluations: int, best: Sequence[float], mean: Sequence[float]):
        self.generation.append(int(k))
        self.evaluations.append(int(evaluations))
        self.best.append([float(b) for b in best])
        self.mean.append([float(m) for m in mean])

    @property
    def final_best(self) -> list:
        return list(self.best[-1])

    def best_series(self, m: int) -> np.ndarray:
        return np.array([row[m] for row in self.best])

    def columns(self) -> list:
        cols = ["generation", "evaluations"]
        for m in range(len(self.task_ids)):
            cols += [f"best_T{m + 1}", f"mean_T{m + 1}"]
        return cols

    def rows(self) -> list:
        out = []
        for k, ev, b, mu in zip(self.generation, self.evaluations, self.best, self.mean):
            row = [k, ev]
            for bm, mm in zip(b, mu):
                row += [bm, mm]
            out.append(row)
        return out


def _evaluate(task: TaskDefinition, genes: np.ndarray, budget_left: int):
    """Repair and evaluate at most ``budget_left`` rows; extra rows are dropped."""
    genes = genes[: max(budget_left, 0)]
    if task.repair is not None and len(genes):
        genes = task.repair(genes)
    if not len(genes):
        return genes, np.empty(0)
    return genes, task.evaluate(genes)


def _init_population(task: TaskDefinition, n: int, rng: np.random.Generator, budget: int) -> Population:
    if budget < n:
        raise ConfigError(f"evaluation budget {budget} cannot cover the initial population of {n}")
    genes, fitness = _evaluate(task, rng.random((n, task.dim)), n)
    return sort_population(Population(task.id, genes, fitness), task.direction)


def make_offspring(pool: np.ndarray, config: SolverConfig, rng: np.random.Generator) -> np.ndarray:
    """``N`` children from a pool of ``N``: permutation pairing, SBX, mutation.

    Parents ``s[n]`` and ``s[N/2 + n]`` produce children ``2n`` and ``2n + 1``.
    """
    n = pool.shape[0]
    s = rng.permutation(n)
    half = n // 2
    x_e, x_f = sbx_crossover(pool[s[:half]], pool[s[half:]], config.sbx, rng)
    children = np.empty_like(pool)
    children[0::2] = x_e
    children[1::2] = x_f
    return polynomial_mutation(children, config.mutation, rng)


def _step(task, parents, pool, config, rng, budget_left):
    children, fitness = _evaluate(task, make_offspring(pool.genes, config, rng), budget_left)
    new = elitist_select(parents, Population(task.id, children, fitness), task.direction)
    return new, len(fitness)


def _best_mean(pop: Population):
    return pop.fitness[0], float(np.mean(pop.fitness))


def _finish(trace: RunTrace, tasks, pops):
    for task, pop in zip(tasks, pops):
        trace.best_genes.append(pop.genes[0].copy())
        trace.best_point.append(task.lower + pop.genes[0] * (task.upper - task.lower))
    return trace


def run_soea(task: TaskDefinition, config: SolverConfig, seed: int = 0, stream: int = 0,
             budget: Optional[int] = None) -> RunTrace:
    """Generational GA on one task using random stream ``stream`` of ``seed``."""
    rng = make_streams(seed, stream + 1)[stream]
    budget = config.eval_budget if budget is None else budget
    n = config.pop_size
    pop = _init_population(task, n, rng, budget)
    evals = n
    trace = RunTrace("soea", (task.id,), seed)
    trace.record(0, evals, *zip(_best_mean(pop)))
    for k in range(1, config.generations + 1):
        if evals >= budget:
            break
        pop, used = _step(task, pop, pop, config, rng, budget - evals)
        evals += used
        trace.record(k, evals, *zip(_best_mean(pop)))
    return _finish(trace, [task], [pop])


def run_soea_pair(tasks: Sequence[TaskDefinition], config: SolverConfig, seed: int = 0) -> RunTrace:
    """Independent SOEAs on each task, splitting the budget equally.

    Returned as one multi-task trace so it lines up with MTGA/MFEA traces.
    """
    share = config.eval_budget // len(tasks)
    runs = [run_soea(t, config, seed, stream=m, budget=share) for m, t in enumerate(tasks)]
    trace = RunTrace("soea", tuple(t.id for t in tasks), seed)
    length = max(len(r.generation) for r in runs)
    for i in range(length):
        rows = [min(i, len(r.generation) - 1) for r in runs]
        evals = sum(r.evaluations[j] for r, j in zip(runs, rows))
        trace.record(i, evals, [r.best[j][0] for r, j in zip(runs, rows)],
                     [r.mean[j][0] for r, j in zip(runs, rows)])
    trace.best_genes = [r.best_genes[0] for r in runs]
    trace.best_point = [r.best_point[0] for r in runs]
    return trace


def run_mtga(tasks: Sequence[TaskDefinition], config: SolverConfig, seed: int = 0) -> RunTrace:
    """Multi-tasking GA with bias-corrected sequential transfer (two tasks).

    Each generation: estimate the top-``n_t`` means of both populations, then
    for task 1 and task 2 in turn build the crossover pool from ``n_t``
    transferred donors plus the task's own ``N - n_t`` best, breed ``N``
    children, and keep the ``N`` best of parents + children. Task 2's donors
    come from task 1's freshly updated population.

    Each task may spend ``eval_budget // 2`` evaluations.
    """
    if len(tasks) != 2:
        raise ConfigError("MTGA is implemented for exactly two tasks")
    n, n_t = config.pop_size, config.n_t
    streams = make_streams(seed, 2)
    budget = config.eval_budget // 2
    tables = config.fixed_tables or (None, None)
    kinds = [t.gene_kind for t in tasks]
    pops = [_init_population(t, n, rng, budget) for t, rng in zip(tasks, streams)]
    evals = [n, n]

    trace = RunTrace("mtga", tuple(t.id for t in tasks), seed)
    trace.record(0, sum(evals), *zip(*map(_best_mean, pops)))
    for k in range(1, config.generations + 1):
        if all(e >= budget for e in evals):
            break
        if n_t:
            means = [top_mean(p, n_t, kd) for p, kd in zip(pops, kinds)]
        for m in (0, 1):
            if evals[m] >= budget:
                continue
            task, other = tasks[m], 1 - m
            pool = pops[m]
            if n_t:
                if config.recompute_means_per_transfer:
                    means = [top_mean(p, n_t, kd) for p, kd in zip(pops, kinds)]
                bias = BiasEstimate(means[other], means[m], n_t)
                pool = build_transfer_population(pops[m], pops[other], bias, n_t, config.matching,
                                                 streams[m], tables[m], repair=task.repair)
            pops[m], used = _step(task, pops[m], pool, config, streams[m], budget - evals[m])
            evals[m] += used
        trace.record(k, sum(evals), *zip(*map(_best_mean, pops)))
    return _finish(trace, tasks, pops)


# --- MFEA -----------------------------------------------------------------
#
# Reconstruction of the classic multifactorial EA:
#   * one unified population of 2N individuals over max(d_1, d_2) genes;
#     task m reads the first d_m genes;
#   * initial individuals are evaluated on every task, and get skill factor
#     argmin of their factorial ranks (lowest task index on ties);
#   * random pairing; a pair crosses over (SBX) if both share a skill factor
#     or with probability rmp, otherwise each child is a copy of its parent;
#     every child is then mutated;
#   * crossover children of mixed-skill parents imitate either parent's skill
#     factor with probability 1/2, other children inherit their parent's;
#   * children are evaluated on their skill task only (other costs = inf);
#   * parents + children are ranked per task, scalar fitness = 1/best rank,
#     skill factors are refreshed and the 2N fittest survive.


def _factorial_ranks(costs: np.ndarray) -> np.ndarray:
    ranks = np.empty_like(costs)
    for m in range(costs.shape[1]):
        order = np.argsort(costs[:, m], kind="stable")
        ranks[order, m] = np.arange(1, costs.shape[0] + 1)
    return ranks


def _mfea_eval(tasks, genes, skill, budget_left):
    """Evaluate each row on its skill task; rows beyond the budget are dropped."""
    keep = min(len(genes), max(budget_left, 0))
    genes, skill = genes[:keep], skill[:keep]
    costs = np.full((keep, len(tasks)), np.inf)
    for m, task in enumerate(tasks):
        rows = np.flatnonzero(skill == m)
        if not len(rows):
            continue
        sub = genes[rows, : task.dim]
        if task.repair is not None:
            sub = task.repair(sub)
            genes[rows, : task.dim] = sub
        costs[rows, m] = task.sign * task.evaluate(sub)
    return genes, skill, costs


def run_mfea(tasks: Sequence[TaskDefinition], config: SolverConfig, seed: int = 0) -> RunTrace:
    """Multifactorial EA baseline over a unified population of ``2 * pop_size``."""
    if len(tasks) != 2:
        raise ConfigError("MFEA baseline is implemented for two tasks")
    rng = make_streams(seed, 1)[0]
    M = len(tasks)
    size = config.pop_size * M
    D = max(t.dim for t in tasks)
    budget = config.eval_budget
    if budget < size * M:
        raise ConfigError(f"evaluation budget {budget} cannot cover the initial evaluations")

    genes = rng.random((size, D))
    costs = np.empty((size, M))
    for m, task in enumerate(tasks):
        if task.repair is not None:
            genes[:, : task.dim] = task.repair(genes[:, : task.dim])
        costs[:, m] = task.sign * task.evaluate(genes[:, : task.dim])
    evals = size * M
    ranks = _factorial_ranks(costs)
    skill = np.argmin(ranks, axis=1)

    trace = RunTrace("mfea", tuple(t.id for t in tasks), seed)

    def record(k):
        best, mean = [], []
        for m, task in enumerate(tasks):
            best.append(task.sign * costs[:, m].min())
            own = costs[skill == m, m]
            mean.append(task.sign * own.mean() if len(own) else np.nan)
        trace.record(k, evals, best, mean)

    record(0)
    half = size // 2
    for k in range(1, config.generations + 1):
        if evals >= budget:
            break
        s = rng.permutation(size)
        pa, pb = s[:half], s[half:]
        x_e, x_f = sbx_crossover(genes[pa], genes[pb], config.sbx, rng)
        gate = rng.random(half) < config.rmp
        cross = (skill[pa] == skill[pb]) | gate
        x_e = np.where(cross[:, None], x_e, genes[pa])
        x_f = np.where(cross[:, None], x_f, genes[pb])
        imitate = rng.random((half, 2)) < 0.5
        skill_e = np.where(cross & imitate[:, 0], skill[pb], skill[pa])
        skill_f = np.where(cross & imitate[:, 1], skill[pa], skill[pb])
        children = np.empty((size, D))
        children[0::2], children[1::2] = x_e, x_f
        child_skill = np.empty(size, dtype=int)
        child_skill[0::2], child_skill[1::2] = skill_e, skill_f
        children = polynomial_mutation(children, config.mutation, rng)

        children, child_skill, child_costs = _mfea_eval(tasks, children, child_skill, budget - evals)
        evals += len(children)

        pool_genes = np.vstack([genes, children])
        pool_costs = np.vstack([costs, child_costs])
        pool_ranks = _factorial_ranks(pool_costs)
        scalar = 1.0 / pool_ranks.min(axis=1)
        keep = np.argsort(-scalar, kind="stable")[:size]
        genes, costs = pool_genes[keep], pool_costs[keep]
        skill = np.argmin(pool_ranks[keep], axis=1)
        record(k)

    for m, task in enumerate(tasks):
        i = int(np.argmin(costs[:, m]))
        g = genes[i, : task.dim].copy()
        trace.best_genes.append(g)
        trace.best_point.append(task.lower + g * (task.upper - task.lower))
    return trace


SOLVERS = {"mtga": run_mtga, "soea": run_soea_pair, "mfea": run_mfea}
