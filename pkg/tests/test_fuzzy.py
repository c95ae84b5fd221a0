import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtga.fuzzy import (
    IT2,
    MIN_STD,
    N_GENES,
    T1,
    FlcGenome,
    enforce_flc_constraints,
    flc_gene_matching,
    it2_inference_km,
    it2_interval,
    km_reduce,
    repair_genes,
    rule_firing,
    t1_inference,
)
from mtga.transfer import BiasEstimate, transfer_chromosome

VERTICES = np.array(list(itertools.product([0, 1], repeat=9)), dtype=bool)


def km_oracle(fl, fu, y):
    """Extremes of the weighted average over every vertex of the firing box."""
    w = np.where(VERTICES, fu, fl)
    den = w.sum(axis=1)
    ok = den > 0
    avg = (w[ok] * y).sum(axis=1) / den[ok]
    return avg.min(), avg.max()


def random_genome(rng, kind, std_hi=1.0):
    g = np.empty(N_GENES[kind])
    n_std = 3 if kind == T1 else 6
    g[:3] = rng.uniform(-1.5, 1.5, 3)
    g[3:3 + n_std] = rng.uniform(0.05, std_hi, n_std)
    g[3 + n_std:6 + n_std] = rng.uniform(-1.5, 1.5, 3)
    g[6 + n_std:6 + 2 * n_std] = rng.uniform(0.05, std_hi, n_std)
    g[-5:] = rng.random(5)
    return enforce_flc_constraints(g, kind)


def symmetric_t1():
    return FlcGenome(T1, np.array([-1.0, 0, 1]), np.full(3, 0.5), np.full(3, 0.5), np.array([-1.0, 0, 1]),
                     np.full(3, 0.5), np.full(3, 0.5), np.array([0, 0.25, 0.5, 0.75, 1]))


def as_it2(g: FlcGenome, e_hi=None, de_hi=None):
    return FlcGenome(IT2, g.e_means, g.e_std_lower, g.e_std_upper if e_hi is None else e_hi, g.de_means,
                     g.de_std_lower, g.de_std_upper if de_hi is None else de_hi, g.consequents)


def test_symmetric_genome_centre_output():
    assert t1_inference(symmetric_t1(), 0.0, 0.0) == pytest.approx(0.5, abs=1e-15)


def test_constant_consequents():
    g = symmetric_t1()
    g = FlcGenome(T1, g.e_means, g.e_std_lower, g.e_std_upper, g.de_means, g.de_std_lower,
                  g.de_std_upper, np.full(5, 0.37))
    for e, de in [(0, 0), (1.3, -0.2), (-4, 4)]:
        assert t1_inference(g, e, de) == pytest.approx(0.37, abs=1e-15)
        assert it2_inference_km(as_it2(g, e_hi=np.full(3, 0.9)), e, de) == pytest.approx(0.37, abs=1e-15)


def test_narrow_mfs_select_first_rule():
    g = symmetric_t1()
    tiny = np.full(3, 0.02)
    g = FlcGenome(T1, g.e_means, tiny, tiny, g.de_means, tiny, tiny, g.consequents)
    assert t1_inference(g, -1.0, -1.0) == pytest.approx(0.0, abs=1e-12)
    assert it2_inference_km(as_it2(g), -1.0, -1.0) == pytest.approx(0.0, abs=1e-12)


def test_single_effective_rule_it2():
    g = symmetric_t1()
    lo, hi = np.full(3, 0.02), np.full(3, 0.03)
    g = FlcGenome(IT2, g.e_means, lo, hi, g.de_means, lo, hi, g.consequents)
    assert it2_inference_km(g, 1.0, 0.0) == pytest.approx(0.75, abs=1e-9)


def test_no_firing_falls_back_to_centre_consequent():
    g = symmetric_t1()
    tiny = np.full(3, MIN_STD)
    g = FlcGenome(T1, g.e_means, tiny, tiny, g.de_means, tiny, tiny, np.array([0.1, 0.2, 0.3, 0.9, 1.0]))
    assert t1_inference(g, 100.0, 100.0) == 0.3
    assert it2_inference_km(as_it2(g), 100.0, 100.0) == 0.3


def test_km_two_rule_example():
    yl, yr = km_reduce(np.array([0.5, 0.5]), np.array([1.0, 1.0]), np.array([0.0, 1.0]))
    assert yl == pytest.approx(1 / 3, abs=1e-15) and yr == pytest.approx(2 / 3, abs=1e-15)


def test_km_unsorted_consequents():
    fl, fu, y = np.array([0.2, 0.5, 0.1]), np.array([0.4, 0.9, 0.3]), np.array([0.9, 0.1, 0.5])
    order = np.argsort(y)
    assert km_reduce(fl, fu, y) == pytest.approx(km_reduce(fl[order], fu[order], y[order]), abs=1e-15)


def test_km_matches_exhaustive_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(300):
        g = random_genome(rng, IT2, std_hi=2.0)
        e, de = rng.uniform(-2, 2, 2)
        fl, fu, y = rule_firing(g, e, de)
        yl, yr = it2_interval(g, e, de)
        ol, orr = km_oracle(fl, fu, y)
        assert abs(yl - ol) < 1e-9 and abs(yr - orr) < 1e-9
        assert it2_inference_km(g, e, de) == pytest.approx(0.5 * (ol + orr), abs=1e-9)


def test_degenerate_interval_equals_t1():
    rng = np.random.default_rng(7)
    for _ in range(300):
        g = random_genome(rng, T1, std_hi=2.0)
        e, de = rng.uniform(-2, 2, 2)
        assert abs(it2_inference_km(as_it2(g), e, de) - t1_inference(g, e, de)) < 1e-12


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_outputs_within_consequent_range_and_nested(seed, e, de):
    rng = np.random.default_rng(seed)
    g2 = random_genome(rng, IT2)
    g1 = random_genome(rng, T1)
    for g, f in ((g1, t1_inference), (g2, it2_inference_km)):
        out = f(g, e, de)
        assert g.consequents.min() - 1e-12 <= out <= g.consequents.max() + 1e-12
    fl, fu, y = rule_firing(g2, e, de)
    if fu.sum() > 0:
        yl, yr = it2_interval(g2, e, de)
        w = 0.5 * (fl + fu)
        mid = (w * y).sum() / w.sum()
        assert yl - 1e-12 <= mid <= yr + 1e-12


def test_constraint_examples():
    raw = np.concatenate([[0.5, -1, 0], [0.8, 0.3, 0.5, 0.5, 0.5, 0.5], [0, 0, 0], [0.5] * 6, np.linspace(1, 0, 5)])
    g = enforce_flc_constraints(raw, IT2)
    np.testing.assert_array_equal(g.e_means, [-1, 0, 0.5])
    assert (g.e_std_lower[0], g.e_std_upper[0]) == (0.3, 0.8)
    assert np.all(np.diff(g.consequents) >= 0)


def test_non_positive_std_clamped():
    raw = np.zeros(N_GENES[T1])
    raw[3:6] = [-1.0, 0.0, 0.5]
    g = enforce_flc_constraints(raw, T1)
    np.testing.assert_array_equal(g.e_std_lower, [MIN_STD, MIN_STD, 0.5])


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1), st.sampled_from([T1, IT2]))
def test_constraints_idempotent(seed, kind):
    raw = np.random.default_rng(seed).uniform(-2, 2, N_GENES[kind])
    once = enforce_flc_constraints(raw, kind)
    twice = enforce_flc_constraints(once.genes(), kind)
    np.testing.assert_array_equal(once.packed(), twice.packed())
    np.testing.assert_array_equal(repair_genes(once.genes(), kind), once.genes())


def test_repair_works_on_batches():
    rng = np.random.default_rng(0)
    batch = rng.random((4, N_GENES[IT2]))
    out = repair_genes(batch, IT2)
    for row, fixed in zip(batch, out):
        np.testing.assert_array_equal(repair_genes(row, IT2), fixed)


def test_matching_covers_t1_subset():
    into_t1, into_it2 = flc_gene_matching()
    assert (into_it2.index_map >= 0).sum() == 17
    assert sorted(into_t1.index_map.tolist()) == sorted(np.flatnonzero(into_it2.index_map >= 0).tolist())


def test_matching_round_trip_identity():
    into_t1, into_it2 = flc_gene_matching()
    rng = np.random.default_rng(5)
    t1 = rng.random(17)
    base = rng.random(23)
    zero = lambda ds, dt: BiasEstimate(np.zeros(ds), np.zeros(dt), 1)
    it2 = transfer_chromosome(t1, zero(17, 23), into_it2, base=base)
    back = transfer_chromosome(it2, zero(23, 17), into_t1)
    np.testing.assert_array_equal(back, t1)


def test_transferred_std_above_retained_upper_is_swapped():
    _, into_it2 = flc_gene_matching()
    t1 = np.full(17, 0.5)
    t1[3] = 0.9
    base = np.full(23, 0.4)
    it2 = transfer_chromosome(t1, BiasEstimate(np.zeros(17), np.zeros(23), 1), into_it2, base=base)
    assert (it2[3], it2[4]) == (0.9, 0.4)
    fixed = repair_genes(it2, IT2)
    assert (fixed[3], fixed[4]) == (0.4, 0.9)
