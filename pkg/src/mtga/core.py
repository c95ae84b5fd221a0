"""Domain types shared by every solver.

Chromosomes live in a normalized ``[0, 1]^d`` box per task. Decoding to the
task's physical units happens only when the objective is evaluated, so the
variation and transfer operators never see task bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

MINIMIZE = "minimize"
MAXIMIZE = "maximize"
NUMERIC = "numeric"
CATEGORICAL = "categorical"


class ConfigError(ValueError):
    """Invalid user-supplied configuration (dimensions, bounds, counts)."""


@dataclass
class Chromosome:
    genes: np.ndarray
    fitness: Optional[float] = None
    feasible: bool = True

    def __post_init__(self):
        self.genes = np.asarray(self.genes, dtype=float)

    def __len__(self):
        return self.genes.shape[0]


@dataclass
class TaskDefinition:
    """One optimization task.

    ``objective`` maps a batch of task-space points of shape ``(n, dim)`` to
    ``n`` objective values. Set ``batched=False`` for a scalar callback taking
    a single point; it is then applied row by row.

    ``repair`` is an optional in-place-free map on normalized genes (batch of
    rows) applied before evaluation, used for ordering constraints such as the
    fuzzy controller's sorted membership means.
    """

    id: str
    lower: np.ndarray
    upper: np.ndarray
    objective: Callable
    direction: str = MINIMIZE
    gene_kind: Optional[Sequence[str]] = None
    repair: Optional[Callable[[np.ndarray], np.ndarray]] = None
    batched: bool = True

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ConfigError(f"task {self.id}: lower/upper must be 1-D vectors of equal length")
        if not np.all(self.lower < self.upper):
            raise ConfigError(f"task {self.id}: every lower bound must be below its upper bound")
        if self.gene_kind is None:
            self.gene_kind = (NUMERIC,) * self.dim
        self.gene_kind = tuple(self.gene_kind)
        if len(self.gene_kind) != self.dim:
            raise ConfigError(f"task {self.id}: gene_kind has {len(self.gene_kind)} entries, expected {self.dim}")
        bad = set(self.gene_kind) - {NUMERIC, CATEGORICAL}
        if bad:
            raise ConfigError(f"task {self.id}: unknown gene kinds {sorted(bad)}")
        if self.direction not in (MINIMIZE, MAXIMIZE):
            raise ConfigError(f"task {self.id}: direction must be '{MINIMIZE}' or '{MAXIMIZE}'")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def numeric_mask(self) -> np.ndarray:
        return np.array([k == NUMERIC for k in self.gene_kind])

    @property
    def sign(self) -> float:
        """Multiplier turning the objective into a cost to minimize."""
        return 1.0 if self.direction == MINIMIZE else -1.0

    def evaluate(self, genes: np.ndarray) -> np.ndarray:
        """Objective values (task units) for a batch of normalized gene rows."""
        genes = np.atleast_2d(genes)
        x = decode(genes, self)
        if self.batched:
            values = np.asarray(self.objective(x), dtype=float).reshape(-1)
        else:
            values = np.array([float(self.objective(row)) for row in x])
        if values.shape[0] != genes.shape[0]:
            raise ConfigError(f"task {self.id}: objective returned {values.shape[0]} values for {genes.shape[0]} points")
        return values


@dataclass
class Population:
    """Array-backed population: one row of ``genes`` per member.

    ``fitness`` holds objective values in task units; ``nan`` marks an
    unevaluated member (e.g. a transferred chromosome that only serves as
    crossover material).
    """

    task_id: str
    genes: np.ndarray
    fitness: np.ndarray = field(default=None)

    def __post_init__(self):
        self.genes = np.atleast_2d(np.asarray(self.genes, dtype=float))
        if self.fitness is None:
            self.fitness = np.full(self.genes.shape[0], np.nan)
        self.fitness = np.asarray(self.fitness, dtype=float).reshape(-1)
        if self.fitness.shape[0] != self.genes.shape[0]:
            raise ValueError("fitness length does not match number of members")

    def __len__(self):
        return self.genes.shape[0]

    @property
    def capacity(self) -> int:
        return self.genes.shape[0]

    @property
    def dim(self) -> int:
        return self.genes.shape[1]

    @property
    def members(self) -> list[Chromosome]:
        return [
            Chromosome(g.copy(), None if np.isnan(f) else float(f))
            for g, f in zip(self.genes, self.fitness)
        ]

    @classmethod
    def from_members(cls, task_id: str, members: Sequence[Chromosome]) -> "Population":
        genes = np.array([m.genes for m in members], dtype=float)
        fitness = np.array([np.nan if m.fitness is None else m.fitness for m in members])
        return cls(task_id, genes, fitness)

    def copy(self) -> "Population":
        return Population(self.task_id, self.genes.copy(), self.fitness.copy())


def make_streams(seed: int, n: int) -> list[np.random.Generator]:
    """``n`` independent generators derived from one 64-bit seed.

    Stream ``m`` is the same regardless of how many streams are requested, so
    a single-task run on stream ``m`` reproduces task ``m`` of a multi-task
    run draw for draw.
    """
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.default_rng(c) for c in children]


def _check_dim(genes: np.ndarray, task: TaskDefinition):
    if genes.shape[-1] != task.dim:
        raise ConfigError(f"task {task.id}: got {genes.shape[-1]} genes, expected {task.dim}")


def decode(genes, task: TaskDefinition) -> np.ndarray:
    """Map normalized genes to task-space points (row-wise for 2-D input)."""
    genes = np.asarray(genes.genes if isinstance(genes, Chromosome) else genes, dtype=float)
    _check_dim(genes, task)
    return task.lower + genes * (task.upper - task.lower)


def encode(x, task: TaskDefinition) -> np.ndarray:
    """Inverse of :func:`decode`."""
    x = np.asarray(x, dtype=float)
    _check_dim(x, task)
    return (x - task.lower) / (task.upper - task.lower)


def sort_order(fitness: np.ndarray, direction: str = MINIMIZE) -> np.ndarray:
    """Stable best-to-worst permutation of ``fitness``."""
    fitness = np.asarray(fitness, dtype=float)
    if np.isnan(fitness).any():
        raise RuntimeError("cannot sort a population with unevaluated members")
    key = fitness if direction == MINIMIZE else -fitness
    return np.argsort(key, kind="stable")


def sort_population(pop: Population, direction: str = MINIMIZE) -> Population:
    order = sort_order(pop.fitness, direction)
    return Population(pop.task_id, pop.genes[order], pop.fitness[order])
