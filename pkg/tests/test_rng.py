import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from thzcov import rng


@given(st.integers(0, 2 ** 63 - 1), st.integers(0, 10 ** 9), st.sampled_from(sorted(rng.STREAMS)))
def test_draws_are_pure_functions_of_key(seed, trial, stream):
    a = rng.uniform(seed, np.array([trial]), stream, np.arange(4, dtype=np.uint64))
    b = rng.uniform(seed, np.array([trial]), stream, np.arange(4, dtype=np.uint64))
    assert np.array_equal(a, b)
    assert np.all((a > 0) & (a < 1))


def test_batch_matches_single_trial():
    trials = np.arange(50, dtype=np.int64)
    batch = rng.uniform(7, trials[:, None], "humans", np.arange(3, dtype=np.uint64)[None, :])
    for t in (0, 17, 49):
        g = rng.CounterGenerator(7, t, "humans")
        assert np.array_equal(batch[t], g.random(3))


def test_streams_and_seeds_differ():
    c = np.arange(1000, dtype=np.uint64)
    a = rng.uniform(1, np.array([0]), "walls_x", c)
    assert not np.array_equal(a, rng.uniform(1, np.array([0]), "walls_y", c))
    assert not np.array_equal(a, rng.uniform(2, np.array([0]), "walls_x", c))
    assert not np.array_equal(a, rng.uniform(1, np.array([1]), "walls_x", c))


def test_uniformity_and_exponential_mean():
    u = rng.uniform(3, np.arange(200_000), "beam", np.uint64(0))
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    e = rng.exponential(3, np.arange(200_000), "walls_x", np.uint64(0), 0.5)
    assert abs(e.mean() - 2.0) < 0.03


def test_generator_consumes_counters():
    g = rng.CounterGenerator(5, 3, "human_pos")
    first = g.random(2)
    assert g.random() == rng.uniform(5, np.array([3]), "human_pos", np.uint64(2))[0]
    assert np.all((g.uniform(-2, 2, size=(3, 2)) >= -2))
    assert first.shape == (2,)
