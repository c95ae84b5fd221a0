"""Bias-corrected chromosome transfer between two task populations.

The bias between two tasks is estimated as the difference between the mean
genes of each population's ``n_t`` fittest members. A donor chromosome is moved
into the target task gene by gene::

    target[i] = donor[I[i]] - mean_donor[I[i]] + mean_target[i]

where ``I`` maps each target gene to a donor gene. Index maps here are
0-based; ``-1`` marks a target gene that is not transferred and keeps the
value of a base chromosome from the target population.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import CATEGORICAL, ConfigError, Population

RANDOM = "random"
FIXED = "fixed"
UNMATCHED = -1


@dataclass(frozen=True)
class BiasEstimate:
    mean_source: np.ndarray
    mean_target: np.ndarray
    n_t: int


@dataclass(frozen=True)
class GeneMatching:
    index_map: np.ndarray
    mode: str = RANDOM

    @property
    def d_target(self) -> int:
        return self.index_map.shape[-1]


def top_mean(pop: Population, n_t: int, gene_kind: Optional[Sequence[str]] = None) -> np.ndarray:
    """Mean of the first ``n_t`` members of a best-first sorted population.

    Categorical gene positions get ``nan``; they never take part in the bias
    correction.
    """
    if not 1 <= n_t <= len(pop):
        raise ConfigError(f"n_t={n_t} outside [1, {len(pop)}]")
    mean = pop.genes[:n_t].mean(axis=0)
    if gene_kind is not None:
        mean = np.where([k == CATEGORICAL for k in gene_kind], np.nan, mean)
    return mean


def estimate_bias(source: Population, target: Population, n_t: int,
                  source_kind=None, target_kind=None) -> BiasEstimate:
    return BiasEstimate(top_mean(source, n_t, source_kind), top_mean(target, n_t, target_kind), n_t)


def _parse_fixed_table(d_source: int, d_target: int, table) -> np.ndarray:
    if isinstance(table, GeneMatching):
        table = table.index_map
    table = np.asarray(table).tolist() if isinstance(table, np.ndarray) else list(table)
    if table and all(isinstance(t, (list, tuple)) for t in table):
        # (target_index, source_index) pairs; targets not listed stay unmatched
        index_map = np.full(d_target, UNMATCHED, dtype=int)
        for tgt, src in table:
            if not (0 <= tgt < d_target and 0 <= src < d_source):
                raise ConfigError(f"fixed matching pair ({tgt}, {src}) out of range "
                                  f"for d_target={d_target}, d_source={d_source}")
            index_map[tgt] = src
        return index_map
    if len(table) != d_target:
        raise ConfigError(f"fixed matching table has {len(table)} entries, expected {d_target}")
    index_map = np.array([UNMATCHED if t is None else t for t in table], dtype=int)
    if np.any((index_map < UNMATCHED) | (index_map >= d_source)):
        raise ConfigError("fixed matching table entry out of range")
    return index_map


def build_matching(d_source: int, d_target: int, mode: str = RANDOM,
                   rng: Optional[np.random.Generator] = None, fixed_table=None,
                   count: Optional[int] = None) -> GeneMatching:
    """Map target genes to donor genes.

    Random mode samples without replacement when ``d_source >= d_target`` and
    with replacement otherwise. With ``count`` set, returns ``count``
    independent random maps stacked as rows (one per transferred chromosome).
    """
    if d_source < 1 or d_target < 1:
        raise ConfigError("dimensions must be positive")
    if mode == FIXED:
        if fixed_table is None:
            raise ConfigError("fixed matching requires a table")
        index_map = _parse_fixed_table(d_source, d_target, fixed_table)
        if count is not None:
            index_map = np.tile(index_map, (count, 1))
        return GeneMatching(index_map, FIXED)
    if mode != RANDOM:
        raise ConfigError(f"unknown matching mode {mode!r}")
    if fixed_table is not None:
        raise ConfigError("a fixed table was given for random matching")
    rows = 1 if count is None else count
    if d_source >= d_target:
        pool = np.tile(np.arange(d_source), (rows, 1))
        index_map = rng.permuted(pool, axis=1)[:, :d_target]
    else:
        index_map = rng.integers(0, d_source, size=(rows, d_target))
    if count is None:
        index_map = index_map[0]
    return GeneMatching(index_map, RANDOM)


def transfer_chromosome(src, bias: BiasEstimate, matching: GeneMatching, base=None,
                        clip: bool = True) -> np.ndarray:
    """Move donor genes ``src`` into the target task's gene space.

    Works on a single chromosome or a batch (rows of ``src`` paired with rows
    of ``matching.index_map``). Donor or target positions whose mean is
    ``nan`` (categorical) are copied without correction; unmatched target
    positions take their value from ``base``.
    """
    src = np.asarray(src, dtype=float)
    index_map = np.asarray(matching.index_map)
    d_source = bias.mean_source.shape[0]
    d_target = bias.mean_target.shape[0]
    if src.shape[-1] != d_source or index_map.shape[-1] != d_target:
        raise ValueError(f"inconsistent dimensions: donor {src.shape[-1]} vs bias {d_source}, "
                         f"matching {index_map.shape[-1]} vs bias {d_target}")
    unmatched = index_map == UNMATCHED
    idx = np.where(unmatched, 0, index_map)
    donor = np.take_along_axis(src, idx, axis=-1) if src.ndim == 2 and idx.ndim == 2 else src[..., idx]
    shift = bias.mean_target - bias.mean_source[idx]
    out = donor + np.where(np.isnan(shift), 0.0, shift)
    if unmatched.any():
        if base is None:
            raise ValueError("matching leaves target genes unmatched but no base chromosome was given")
        out = np.where(unmatched, np.asarray(base, dtype=float), out)
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out


def build_transfer_population(target: Population, donor: Population, bias: Optional[BiasEstimate],
                              n_t: int, mode: str = RANDOM, rng: Optional[np.random.Generator] = None,
                              fixed_table=None, repair=None) -> Population:
    """Temporary crossover pool: ``n_t`` transferred donors, then the target's best ``N - n_t``.

    Both populations must be sorted best first. Transferred members carry no
    fitness. Genes that a fixed matching leaves untouched are taken from the
    target's member of the same rank.
    """
    n = len(target)
    if not 0 <= n_t <= n:
        raise ConfigError(f"n_t={n_t} outside [0, {n}]")
    if n_t > len(donor):
        raise ConfigError(f"donor population has fewer than n_t={n_t} members")
    if n_t == 0:
        return target.copy()
    matching = build_matching(donor.dim, target.dim, mode, rng, fixed_table, count=n_t)
    moved = transfer_chromosome(donor.genes[:n_t], bias, matching, base=target.genes[:n_t])
    if repair is not None:
        moved = repair(moved)
    genes = np.vstack([moved, target.genes[: n - n_t]])
    fitness = np.concatenate([np.full(n_t, np.nan), target.fitness[: n - n_t]])
    return Population(target.task_id, genes, fitness)
