import math

import numpy as np
import pytest

from thzcov import simulate as sim
from thzcov.analysis import association_prob
from thzcov.geometry import UeLocation, lattice_links, representative_location
from thzcov.params import SystemParams

UE2 = representative_location("square", 2)


def test_scalar_trial_matches_vectorised(ref_params):
    radius = 60.0
    s = sim.simulate_sinr("square", UE2, ref_params, 300, seed=11, radius=radius)
    for t in range(300):
        out = sim.run_trial(11, t, "square", UE2, 1.0, ref_params, radius=radius)
        assert out.sinr == pytest.approx(s.sinr[t], rel=1e-12)  # summation order differs
        if out.associated is None:
            assert s.serving[t] == -1
        else:
            assert s.links.index(s.serving[t]) == out.associated


def test_deterministic_and_worker_independent(ref_params):
    a = sim.simulate_sinr("hexagonal", UE2, ref_params, 9000, seed=3, radius=60.0, workers=1)
    b = sim.simulate_sinr("hexagonal", UE2, ref_params, 9000, seed=3, radius=60.0, workers=2)
    assert np.array_equal(a.sinr, b.sinr) and np.array_equal(a.serving, b.serving)
    c = sim.simulate_sinr("hexagonal", UE2, ref_params, 9000, seed=4, radius=60.0)
    assert not np.array_equal(a.sinr, c.sinr)


def test_wall_counts_are_poisson(ref_params):
    p = ref_params.replace(lambda_W=0.05)
    half = 60.0 + p.R_B
    counts = [len(sim.realize_scene(9, t, "square", UE2, p, radius=60.0).walls_x) for t in range(400)]
    assert np.mean(counts) == pytest.approx(2 * half * 0.05, rel=0.08)


def test_no_walls_when_density_zero(ref_params):
    p = ref_params.replace(lambda_W=0.0)
    sc = sim.realize_scene(1, 0, "square", UE2, p, radius=40.0)
    assert len(sc.walls_x) == 0 and len(sc.walls_y) == 0
    assert not sim.wall_blocked_matrix(1, np.arange(10), [5.0, -3.0], [1.0, 0.0], 0.0).any()


def test_geometric_humans_match_exponential_law(ref_params):
    p = ref_params.replace(lambda_W=0.0, lambda_B=0.3)
    ue = UeLocation(0.0, 0.0)
    n, hits = 1500, 0
    for t in range(n):
        sc = sim.realize_scene(21, t, "square", ue, p, radius=16.0, human_model="geometric")
        k = sc.ap_indices.index((1, 0))
        hits += not sim.human_blocked(sc, k, p)
    expected = math.exp(-p.derived.alpha * 15.0)
    assert abs(hits / n - expected) < 4 * math.sqrt(expected * (1 - expected) / n)


def test_association_frequency_matches_analysis(ref_params):
    est = sim.estimate_association("square", UE2, ref_params, 40_000, seed=2)
    for idx in [(0, 0), (0, 1), (1, 0)]:
        assert est[idx].contains(association_prob("square", UE2, idx, ref_params), 4.0)


def test_power_scaling(ref_params):
    a = sim.simulate_sinr("square", UE2, ref_params, 2000, seed=8, radius=60.0)
    b = sim.simulate_sinr("square", UE2, ref_params.replace(P_t=2 * ref_params.P_t, N_0=2 * ref_params.N_0),
                          2000, seed=8, radius=60.0)
    assert np.allclose(a.sinr, b.sinr, rtol=1e-12)


def test_coverage_estimates_shape(ref_params):
    out = sim.estimate_coverage("square", UE2, [1.0, 1e9], ref_params, 2000, seed=1, radius=60.0)
    assert out[1].mean == 0.0 and out[0].mean >= out[1].mean
    with pytest.raises(ValueError):
        sim.estimate_coverage("square", UE2, 1.0, ref_params, 10, seed=1)
    with pytest.raises(ValueError):
        sim.simulate_sinr("square", UE2, ref_params, 100, seed=1, pe_model="bogus")


def test_interference_moment_estimator(ref_params):
    m, v = sim.estimate_interference_moments("square", UE2, (0, 0), ref_params, 20_000, seed=5, radius=60.0)
    assert m.mean > 0 and v.mean > 0 and m.n_trials <= 20_000


def test_ppp_sparse_limit(ref_params):
    assert sim.ppp_baseline_coverage(1e-6, 1.0, ref_params, 2000, seed=1).mean < 0.01
    with pytest.raises(ValueError):
        sim.ppp_baseline_coverage(0.0, 1.0, ref_params, 10, seed=1)


def test_ppp_scalar_matches_vectorised(ref_params):
    lam, radius = 5e-3, 40.0
    vec = sim._ppp_block((4, 0, 50, radius, lam, ref_params, "gaussian"))[0]
    for t in range(50):
        out = sim.run_trial(4, t, "ppp", None, 1.0, ref_params, radius=radius, lambda_A=lam)
        assert out.sinr == pytest.approx(vec[t], rel=1e-12)


def test_estimators():
    e = sim.bernoulli_estimate(np.array([1, 0, 1, 1]))
    assert e.mean == 0.75 and e.contains(0.75)
    v = sim.variance_estimate(np.arange(10.0))
    assert v.mean == pytest.approx(np.var(np.arange(10.0), ddof=1))
