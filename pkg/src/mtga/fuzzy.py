"""Type-1 and interval type-2 PI fuzzy logic controllers.

Both controllers take the error ``e`` and its change ``de`` as inputs, use
three Gaussian membership functions per input and the fixed nine-rule base
below, and output a crisp change of control::

            dE1  dE2  dE3
      E1    u1   u2   u3
      E2    u2   u3   u4
      E3    u3   u4   u5

Chromosome layout (task units):

* T1, 17 genes: e-means(3), e-stds(3), de-means(3), de-stds(3), u1..u5
* IT2, 23 genes: e-means(3), e-std pairs (l1, r1, l2, r2, l3, r3),
  de-means(3), de-std pairs(6), u1..u5

The numeric kernels are compiled with numba because every fitness
evaluation runs the controller thousands of times inside a plant
simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .transfer import FIXED, GeneMatching, UNMATCHED

T1 = "T1"
IT2 = "IT2"
N_GENES = {T1: 17, IT2: 23}
MIN_STD = 0.01

# rule (i, j) fires consequent RULE_CONSEQUENT[i, j] (0-based)
RULE_CONSEQUENT = np.add.outer(np.arange(3), np.arange(3))

# gene slices
_T1_E_MEANS, _T1_E_STD = slice(0, 3), slice(3, 6)
_T1_D_MEANS, _T1_D_STD = slice(6, 9), slice(9, 12)
_T1_U = slice(12, 17)
_IT2_E_MEANS, _IT2_E_STD = slice(0, 3), slice(3, 9)
_IT2_D_MEANS, _IT2_D_STD = slice(9, 12), slice(12, 18)
_IT2_U = slice(18, 23)


@dataclass(frozen=True)
class FlcGenome:
    """Decoded controller. For T1 genomes the lower and upper stds coincide."""

    kind: str
    e_means: np.ndarray
    e_std_lower: np.ndarray
    e_std_upper: np.ndarray
    de_means: np.ndarray
    de_std_lower: np.ndarray
    de_std_upper: np.ndarray
    consequents: np.ndarray

    def packed(self) -> np.ndarray:
        """Flat kernel layout: e-means, e-lower, e-upper, de-means, de-lower, de-upper, u1..u5."""
        return np.concatenate([self.e_means, self.e_std_lower, self.e_std_upper, self.de_means,
                               self.de_std_lower, self.de_std_upper, self.consequents])

    def genes(self) -> np.ndarray:
        if self.kind == T1:
            return np.concatenate([self.e_means, self.e_std_lower, self.de_means,
                                   self.de_std_lower, self.consequents])
        e_pairs = np.column_stack([self.e_std_lower, self.e_std_upper]).ravel()
        de_pairs = np.column_stack([self.de_std_lower, self.de_std_upper]).ravel()
        return np.concatenate([self.e_means, e_pairs, self.de_means, de_pairs, self.consequents])


def repair_genes(genes: np.ndarray, kind: str) -> np.ndarray:
    """Re-rank genes so ordering constraints hold (rows of a batch or one chromosome).

    Means sort ascending within each input, consequents sort ascending and
    IT2 std pairs are swapped so that lower <= upper. Works in any affine
    coordinate system shared within each gene group, so it may be applied to
    normalized genes as well.
    """
    g = np.array(genes, dtype=float, copy=True)
    if g.shape[-1] != N_GENES[kind]:
        raise ValueError(f"{kind} genome needs {N_GENES[kind]} genes, got {g.shape[-1]}")
    if kind == T1:
        groups, pairs = (_T1_E_MEANS, _T1_D_MEANS, _T1_U), ()
    else:
        groups, pairs = (_IT2_E_MEANS, _IT2_D_MEANS, _IT2_U), (_IT2_E_STD, _IT2_D_STD)
    for sl in groups:
        g[..., sl] = np.sort(g[..., sl], axis=-1)
    for sl in pairs:
        p = g[..., sl].reshape(g.shape[:-1] + (3, 2))
        g[..., sl] = np.sort(p, axis=-1).reshape(g.shape[:-1] + (6,))
    return g


def enforce_flc_constraints(raw, kind: str, min_std: float = MIN_STD) -> FlcGenome:
    """Build a valid :class:`FlcGenome` from raw task-space genes."""
    g = repair_genes(np.asarray(raw, dtype=float), kind)
    if kind == T1:
        e_lo = e_hi = np.maximum(g[_T1_E_STD], min_std)
        d_lo = d_hi = np.maximum(g[_T1_D_STD], min_std)
        return FlcGenome(T1, g[_T1_E_MEANS], e_lo, e_hi, g[_T1_D_MEANS], d_lo, d_hi, g[_T1_U])
    e = np.maximum(g[_IT2_E_STD].reshape(3, 2), min_std)
    d = np.maximum(g[_IT2_D_STD].reshape(3, 2), min_std)
    return FlcGenome(IT2, g[_IT2_E_MEANS], e[:, 0], e[:, 1], g[_IT2_D_MEANS], d[:, 0], d[:, 1], g[_IT2_U])


def packed_batch(genes: np.ndarray, kind: str, min_std: float = MIN_STD) -> np.ndarray:
    """Kernel layout for a batch of raw task-space genomes."""
    return np.array([enforce_flc_constraints(row, kind, min_std).packed() for row in np.atleast_2d(genes)])


# --- kernels ------------------------------------------------------------------


@numba.njit(cache=True)
def _gauss(x, m, s):
    d = (x - m) / s
    return np.exp(-0.5 * d * d)


@numba.njit(cache=True)
def _firing(p, e, de, lower):
    """Rule firing strengths (9,) and consequents (9,); ``lower`` picks std set."""
    off = 0 if lower else 3
    me = np.empty(3)
    md = np.empty(3)
    for i in range(3):
        me[i] = _gauss(e, p[i], p[3 + off + i])
        md[i] = _gauss(de, p[9 + i], p[12 + off + i])
    f = np.empty(9)
    y = np.empty(9)
    for i in range(3):
        for j in range(3):
            f[3 * i + j] = me[i] * md[j]
            y[3 * i + j] = p[18 + i + j]
    return f, y


@numba.njit(cache=True)
def t1_kernel(p, e, de):
    f, y = _firing(p, e, de, True)
    num = 0.0
    den = 0.0
    for k in range(9):
        num += f[k] * y[k]
        den += f[k]
    if not den > 0.0:
        return p[20]
    return num / den


@numba.njit(cache=True)
def _km_side(fl, fu, y, left):
    """One KM end point for consequents ``y`` sorted ascending.

    The optimal weights switch from one firing bound to the other at some
    index ``k``. All ``n + 1`` switch points are summed directly: with nine
    rules this costs little, and unlike the iterative KM update it cannot
    cycle when rounding puts the average one ulp past a consequent.
    """
    n = y.shape[0]
    best = np.nan
    for k in range(-1, n):
        num = 0.0
        den = 0.0
        for i in range(n):
            if (i <= k) == left:
                w = fu[i]
            else:
                w = fl[i]
            num += w * y[i]
            den += w
        if den > 0.0:
            cand = num / den
            if np.isnan(best) or (cand < best if left else cand > best):
                best = cand
    return best


@numba.njit(cache=True)
def km_reduce(f_lower, f_upper, y):
    """Karnik-Mendel type reduction of crisp consequents ``y`` with firing intervals.

    Returns ``(y_l, y_r)``. The caller guarantees some upper firing is positive.
    """
    ascending = True
    for i in range(1, y.shape[0]):
        if y[i] < y[i - 1]:
            ascending = False
            break
    if ascending:
        return _km_side(f_lower, f_upper, y, True), _km_side(f_lower, f_upper, y, False)
    order = np.argsort(y, kind="mergesort")
    ys = y[order]
    fl = f_lower[order]
    fu = f_upper[order]
    return _km_side(fl, fu, ys, True), _km_side(fl, fu, ys, False)


# rules in ascending consequent order (consequents are sorted, rule (i, j) fires u[i + j])
_KM_ORDER = np.array([0, 1, 3, 2, 4, 6, 5, 7, 8])


@numba.njit(cache=True)
def it2_kernel(p, e, de):
    fl, y = _firing(p, e, de, True)
    fu, _ = _firing(p, e, de, False)
    total = 0.0
    for k in range(9):
        total += fu[k]
    if not total > 0.0:
        return p[20]
    yl, yr = km_reduce(fl[_KM_ORDER], fu[_KM_ORDER], y[_KM_ORDER])
    return 0.5 * (yl + yr)


# --- public inference ---------------------------------------------------------


def t1_inference(genome: FlcGenome, e: float, de: float) -> float:
    return float(t1_kernel(genome.packed(), float(e), float(de)))


def it2_interval(genome: FlcGenome, e: float, de: float) -> tuple:
    """Type-reduced interval ``(y_l, y_r)``; falls back to ``(u3, u3)`` if nothing fires."""
    p = genome.packed()
    fl, y = _firing(p, float(e), float(de), True)
    fu, _ = _firing(p, float(e), float(de), False)
    if not fu.sum() > 0.0:
        return float(p[20]), float(p[20])
    yl, yr = km_reduce(fl, fu, y)
    return float(yl), float(yr)


def it2_inference_km(genome: FlcGenome, e: float, de: float) -> float:
    return float(it2_kernel(genome.packed(), float(e), float(de)))


def rule_firing(genome: FlcGenome, e: float, de: float) -> tuple:
    """Lower firing, upper firing and consequent of each of the nine rules."""
    p = genome.packed()
    fl, y = _firing(p, float(e), float(de), True)
    fu, _ = _firing(p, float(e), float(de), False)
    return fl, fu, y


# --- transfer matching ----------------------------------------------------------


def _it2_index_for_t1():
    """IT2 gene index matched to each of the 17 T1 genes."""
    e_means = [0, 1, 2]
    e_lower = [3, 5, 7]
    de_means = [9, 10, 11]
    de_lower = [12, 14, 16]
    cons = [18, 19, 20, 21, 22]
    return e_means + e_lower + de_means + de_lower + cons


def flc_gene_matching() -> tuple:
    """Fixed T1 <-> IT2 matchings ``(into_t1, into_it2)``.

    Means match means, T1 stds match the IT2 *lower* stds and consequents
    match consequents. The IT2 upper stds are never transferred.
    """
    it2_idx = _it2_index_for_t1()
    into_t1 = np.array(it2_idx, dtype=int)
    into_it2 = np.full(N_GENES[IT2], UNMATCHED, dtype=int)
    into_it2[it2_idx] = np.arange(N_GENES[T1])
    return GeneMatching(into_t1, FIXED), GeneMatching(into_it2, FIXED)
