import math

import numpy as np
import pytest

from thzcov import beamtrain as bt
from thzcov.channel import path_gain
from thzcov.geometry import lattice_links, representative_location


def bessel_i0_series(x, terms=60):
    return sum((x * x / 4) ** k / math.factorial(k) ** 2 for k in range(terms))


def test_beam_count_hand_value(ref_params):
    dh = ref_params.derived.delta_h
    expected = 4 * math.pi * math.atan(15 / dh) / 0.0554 ** 2
    assert bt.beam_count(ref_params) == pytest.approx(expected)
    assert bt.beam_count(ref_params) == pytest.approx(5969.41, abs=0.01)


def test_stages_with_rf_chain_limit(ref_params):
    assert bt.stages_for(bt.beam_count(ref_params), 6) == 5
    assert bt.stages_for(36.0, 6) == 2  # exact power
    assert bt.stages_for(0.5, 6) == 1
    with pytest.raises(bt.TrainingInfeasible):
        bt.stages_for(100.0, 1)


def test_intra_interference(ref_params):
    dc = ref_params.derived
    w = path_gain(ref_params.R_A, dc.delta_h, ref_params.eps_f)
    assert bt.intra_interference(ref_params, 1) == 0.0
    assert bt.intra_interference(ref_params, 4) == pytest.approx(0.75 * ref_params.P_t * dc.G_S * dc.xi * w)
    with pytest.raises(ValueError):
        bt.intra_interference(ref_params, 0)


def test_bessel_factor(ref_params):
    base = bt.inter_interference_approx(ref_params.replace(lambda_W=0.0))
    for lam in (0.01, 0.05, 0.1):
        ratio = bt.inter_interference_approx(ref_params.replace(lambda_W=lam)) / base
        assert ratio == pytest.approx(bessel_i0_series(math.sqrt(2) * lam * ref_params.R_A), rel=1e-12)


def test_exact_interference_brute_sum(ref_params):
    dc = ref_params.derived
    links = lattice_links("square", representative_location("square", 3), 1500.0, ref_params.d_AP)
    far = links.d > ref_params.R_A
    d = links.d[far]
    walls = np.exp(-ref_params.lambda_W * (np.abs(links.sx[far]) + np.abs(links.sy[far])))
    brute = ref_params.P_t * dc.G_S * dc.xi * np.sum(np.exp(-dc.alpha * d) * walls
                                                   * path_gain(d, dc.delta_h, ref_params.eps_f))
    assert bt.inter_interference_exact("square", ref_params) == pytest.approx(brute, rel=1e-9)
    bare = bt.inter_interference_exact("square", ref_params, bare=True)
    assert bare > bt.inter_interference_exact("square", ref_params) / dc.G_S


def test_infeasible_at_default_target(ref_params):
    assert bt.eta(ref_params) > 100
    assert bt.max_concurrent_beams(ref_params) == 1
    with pytest.raises(bt.TrainingInfeasible):
        bt.training_stages(ref_params)
    with pytest.raises(bt.TrainingInfeasible):
        bt.max_concurrent_beams(ref_params.replace(beta_ct=1e6))
    assert bt.training_stages(ref_params, N_ct=6) == 5


def test_concurrent_beams_grow_when_target_relaxed(ref_params):
    lo = bt.max_concurrent_beams_raw(ref_params.replace(beta_ct=10.0))
    hi = bt.max_concurrent_beams_raw(ref_params.replace(beta_ct=0.01))
    assert hi > lo


def test_budget_fields(ref_params):
    b = bt.training_budget(ref_params.replace(beta_ct=0.01))
    assert b.N_ct == min(b.N_ct_max, ref_params.N_RF)
    assert b.N_BT == bt.stages_for(b.beam_count, b.N_ct)


def test_array_sweep_shape(ref_params):
    grid = list(range(4, 66, 2))
    tied = bt.stages_vs_array(ref_params, grid, "tied")
    finite = [v for v in tied if math.isfinite(v)]
    assert len(tied) == len(grid) and finite
    assert min(finite) < finite[0]
    assert all(math.isinf(v) for v in bt.stages_vs_array(ref_params, grid, "fixed"))
    with pytest.raises(ValueError):
        bt.stages_vs_array(ref_params, grid, "other")
