import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtga.core import (
    MAXIMIZE,
    Chromosome,
    ConfigError,
    Population,
    TaskDefinition,
    decode,
    encode,
    make_streams,
    sort_population,
)


def _task(lower, upper, **kw):
    return TaskDefinition("t", lower, upper, lambda x: np.sum(x, axis=-1), **kw)


def test_decode_endpoints():
    task = _task([-5, -5], [5, 5])
    np.testing.assert_array_equal(decode([0, 1], task), [-5, 5])


def test_decode_midpoint():
    task = _task([-3, 0, 10], [1, 8, 11])
    np.testing.assert_allclose(decode([0.5, 0.5, 0.5], task), [-1, 4, 10.5])


def test_decode_quarter():
    # -100 + 0.25 * 200
    assert decode([0.25], _task([-100], [100]))[0] == -50


def test_decode_accepts_chromosome():
    task = _task([0], [2])
    assert decode(Chromosome([0.5]), task)[0] == 1.0


def test_decode_dimension_mismatch():
    with pytest.raises(ConfigError):
        decode([0.1, 0.2, 0.3], _task([0, 0], [1, 1]))


@settings(max_examples=200)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_encode_inverts_decode(d, seed):
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-1e3, 1e3, d)
    hi = lo + rng.uniform(1e-3, 1e3, d)
    task = _task(lo, hi)
    genes = rng.random((5, d))
    np.testing.assert_allclose(encode(decode(genes, task), task), genes, atol=1e-12)


def test_task_validation():
    with pytest.raises(ConfigError):
        _task([1.0], [1.0])
    with pytest.raises(ConfigError):
        _task([0, 0], [1, 1], gene_kind=["numeric"])
    with pytest.raises(ConfigError):
        _task([0], [1], direction="sideways")


def test_scalar_objective_applied_row_by_row():
    task = TaskDefinition("t", [0, 0], [2, 2], lambda x: float(x[0] - x[1]), batched=False)
    np.testing.assert_allclose(task.evaluate(np.array([[1, 0], [0, 1]])), [2, -2])


def test_sort_minimize():
    pop = Population("t", [[0.3], [0.1], [0.2]], [3.0, 1.0, 2.0])
    assert sort_population(pop).fitness.tolist() == [1.0, 2.0, 3.0]


def test_sort_maximize():
    pop = Population("t", [[0.3], [0.1], [0.2]], [3.0, 1.0, 2.0])
    assert sort_population(pop, MAXIMIZE).fitness.tolist() == [3.0, 2.0, 1.0]


def test_sort_equal_fitness_is_stable():
    genes = np.arange(6.0).reshape(6, 1) / 10
    pop = Population("t", genes, np.full(6, 4.2))
    np.testing.assert_array_equal(sort_population(pop).genes, genes)


def test_sort_near_ties_match_python_stable_sort():
    fit = [0.5, 0.5 - 1e-16, 0.5]
    genes = np.array([[0.0], [1.0], [2.0]])
    oracle = sorted(range(3), key=lambda i: fit[i])
    out = sort_population(Population("t", genes, fit))
    assert out.genes[:, 0].astype(int).tolist() == oracle


def test_sort_rejects_unevaluated():
    with pytest.raises(RuntimeError):
        sort_population(Population("t", [[0.1], [0.2]], [1.0, np.nan]))


def test_population_members_roundtrip():
    pop = Population("t", [[0.1, 0.2], [0.3, 0.4]], [1.0, np.nan])
    members = pop.members
    assert members[0].fitness == 1.0 and members[1].fitness is None
    back = Population.from_members("t", members)
    np.testing.assert_array_equal(back.genes, pop.genes)


def test_streams_are_prefix_stable():
    a = make_streams(7, 1)[0].random(4)
    b = make_streams(7, 3)[0].random(4)
    np.testing.assert_array_equal(a, b)
    c, d = make_streams(7, 2)
    assert not np.array_equal(c.random(4), d.random(4))
