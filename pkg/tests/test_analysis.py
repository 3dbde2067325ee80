import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thzcov import analysis as an
from thzcov.blockage import conditional_wall_covariance, conditional_wall_unblocked
from thzcov.channel import interferer_power
from thzcov.geometry import UeLocation, lattice_links, representative_location
from thzcov.params import SystemParams

FAST_EPS = 1e-21  # W; keeps lattice sums small in unit tests


def brute_moments(topology, ue, serving, params, radius):
    """Interference mean/variance by explicit pairwise covariances from the blockage module."""
    links = lattice_links(topology, ue, radius, params.d_AP)
    k = links.position_of(serving)
    g = links.link(k)
    inter = [m for m in range(len(links)) if links.tie[m] >= links.tie[k] and m != k]
    lam, a = params.lambda_W, params.derived.alpha
    w = {m: interferer_power(links.d[m], params) for m in inter}
    ph = {m: math.exp(-a * links.d[m]) for m in inter}
    q = {m: conditional_wall_unblocked(links.link(m), g, lam) for m in inter}
    mu = sum(w[m] * ph[m] * q[m] for m in inter)
    var = sum(w[m] ** 2 * ph[m] * q[m] * (1 - ph[m] * q[m]) for m in inter)
    for x in inter:
        for y in inter:
            if x != y:
                cov = conditional_wall_covariance(links.link(x), links.link(y), g, lam)
                var += w[x] * w[y] * ph[x] * ph[y] * cov
    return mu, var


@pytest.mark.parametrize("topology", ["square", "hexagonal"])
@pytest.mark.parametrize("loc", [1, 2, 3])
def test_moments_match_pairwise_oracle(topology, loc, ref_params):
    ue = representative_location(topology, loc)
    links = lattice_links(topology, ue, 70.0, ref_params.d_AP)
    st_ = an._moments(links, 0, ref_params, 70.0, topology)
    mu, var = brute_moments(topology, ue, links.index(0), ref_params, 70.0)
    assert st_.mu == pytest.approx(mu, rel=1e-12)
    assert st_.sigma2 == pytest.approx(var, rel=1e-10)


@given(st.integers(2, 400), st.floats(0.001, 0.3), st.integers(0, 2 ** 31))
@settings(max_examples=40)
def test_fast_pair_sum_equals_reference(n, lam, seed):
    rng = np.random.default_rng(seed)
    c = np.zeros((n, 4))
    xs = rng.integers(0, 3, n)
    ys = rng.integers(0, 3, n)
    # at most one non-zero entry per axis, with deliberate ties
    c[xs == 1, 0] = rng.choice([1.0, 2.5, 7.0, 30.0], (xs == 1).sum())
    c[xs == 2, 1] = rng.uniform(0, 40, (xs == 2).sum())
    c[ys == 1, 2] = rng.choice([1.0, 2.5, 7.0], (ys == 1).sum())
    c[ys == 2, 3] = rng.uniform(0, 40, (ys == 2).sum())
    u = rng.uniform(0, 1, n)
    ref = an._pair_cov_sum(u, c, lam)
    # the O(n^2) reference cancels terms in floating point; scale the floor to the term size
    assert an.pair_cov_sum(u, c, lam) == pytest.approx(ref, rel=1e-10, abs=1e-12 * np.sum(u) ** 2)


def test_moments_without_walls_are_independent(ref_params):
    p = ref_params.replace(lambda_W=0.0)
    ue = representative_location("square", 2)
    s = an.interference_moments("square", ue, (0, 0), p, epsilon=FAST_EPS)
    links = lattice_links("square", ue, s.truncation_radius, p.d_AP)
    mask = np.arange(len(links)) > 0
    w = interferer_power(links.d[mask], p)
    q = np.exp(-p.derived.alpha * links.d[mask])
    assert s.sigma2 == pytest.approx(np.sum(q * (1 - q) * w ** 2), rel=1e-12)


def test_moments_vanish_with_tiny_power(ref_params):
    s = an.interference_moments("square", UeLocation(0, 0), (0, 0), ref_params.replace(P_t=1e-30),
                                epsilon=1e-60)
    assert s.mu < 1e-40 and s.sigma2 < 1e-80


def test_moments_reject_serving_outside_radius(ref_params):
    with pytest.raises(ValueError):
        an.interference_moments("square", UeLocation(0, 0), (3, 0), ref_params, epsilon=FAST_EPS)


def test_truncation_radius_rules(ref_params):
    assert an.truncation_radius(ref_params, epsilon=1.0) == ref_params.R_A
    r = an.truncation_radius(ref_params, epsilon=FAST_EPS)
    assert r % ref_params.d_AP == 0
    assert an.tail_bound(ref_params, r) < FAST_EPS
    assert an.tail_bound(ref_params, r - ref_params.d_AP) >= FAST_EPS
    only_abs = ref_params.replace(lambda_W=0.0, lambda_B=0.0)
    assert math.isfinite(an.truncation_radius(only_abs, epsilon=FAST_EPS))
    with pytest.raises(ValueError):
        an.truncation_radius(ref_params.replace(lambda_W=0.0, lambda_B=0.0, eps_f=0.0), FAST_EPS)
    with pytest.raises(ValueError):
        an.truncation_radius(ref_params, 0.0)


def test_tail_bound_dominates_actual_tail(ref_params):
    ue = representative_location("square", 3)
    for r in (60.0, 150.0):
        far = lattice_links("square", ue, 1500.0, ref_params.d_AP)
        sel = far.d > r
        mean_tail = np.sum(interferer_power(far.d[sel], ref_params)
                           * np.exp(-ref_params.derived.alpha * far.d[sel]
                                    - ref_params.lambda_W * (np.abs(far.sx[sel]) + np.abs(far.sy[sel]))))
        assert mean_tail <= an.tail_bound(ref_params, r, "square")


def test_association_under_ap(ref_params):
    assert an.association_prob("square", UeLocation(0, 0), (0, 0), ref_params) == pytest.approx(1.0)


@pytest.mark.parametrize("topology", ["square", "hexagonal"])
def test_association_without_walls_factorises(topology, ref_params):
    p = ref_params.replace(lambda_W=0.0)
    ue = representative_location(topology, 3)
    links = lattice_links(topology, ue, p.R_A, p.d_AP)
    ph = np.exp(-p.derived.alpha * links.d)
    for k in range(len(links)):
        expected = ph[k] * np.prod(1 - ph[:k])
        assert an.association_prob(topology, ue, links.index(k), p) == pytest.approx(expected, rel=1e-12)
        assert an.association_prob_independent(topology, ue, links.index(k), p) == pytest.approx(expected)


def test_association_limits(ref_params):
    ue = representative_location("square", 2)
    assert an.association_table("square", ue, ref_params.replace(lambda_W=0, lambda_B=0)).total == pytest.approx(1.0)
    assert an.association_table("square", ue, ref_params.replace(lambda_W=50.0)).total < 1e-100


def test_association_outside_radius(ref_params):
    with pytest.raises(ValueError):
        an.association_prob("square", UeLocation(0, 0), (2, 0), ref_params)


def test_combinatorial_cap(ref_params):
    p = ref_params.replace(R_A=60.0)
    ue = representative_location("square", 2)
    links = lattice_links("square", ue, 60.0, p.d_AP)
    with pytest.raises(an.CombinatorialBlowup):
        an.association_prob("square", ue, links.index(len(links) - 1), p)
    assert an.association_prob("square", ue, links.index(3), p, cap=20) >= 0


@given(st.sampled_from(["square", "hexagonal"]), st.floats(0.0, 0.5), st.floats(0, 1),
       st.floats(0.001, 0.2), st.floats(0.0, 0.3), st.floats(8.0, 25.0))
@settings(max_examples=40)
def test_independent_assumption_overestimates(topology, x, t, lam_w, lam_b, d_ap):
    y = t * x if topology == "square" else min(t * x, 2 * (0.5 - x))
    p = SystemParams(lambda_W=lam_w, lambda_B=lam_b, d_AP=d_ap, R_A=d_ap)
    ue = UeLocation(x, y)
    corr = an.association_table(topology, ue, p)
    ind = an.association_table(topology, ue, p, independent=True)
    assert corr.total <= 1 + 1e-12
    assert all(-1e-12 <= pr <= 1 + 1e-12 for _, pr in corr.entries)
    assert ind.total >= corr.total - 1e-12


def test_disjoint_projections_equal_independent(ref_params):
    # Location 1 of the square grid: neighbour links point in four different directions
    ue = UeLocation(0.0, 0.0)
    p = ref_params.replace(R_A=15.0)
    for idx, pr in an.association_table("square", ue, p).entries:
        assert pr == pytest.approx(an.association_prob_independent("square", ue, idx, p), abs=1e-15)


@pytest.mark.parametrize("loc", [2, 3])
def test_hexagonal_association_at_least_square(loc, ref_params):
    sq = an.association_table("square", representative_location("square", loc), ref_params).total
    hx = an.association_table("hexagonal", representative_location("hexagonal", loc), ref_params).total
    assert hx >= sq


def test_coverage_term_limits():
    dist = an.PointingErrorDist(0.0554, 1.06 / 16)
    assert an.coverage_term(1.0, 0.0, 0.0, 10.0, 1.0, dist) == 0.0  # argument 10 > 1
    assert an.coverage_term(1.0, 0.0, 0.0, 0.1, 1.0, dist) == 1.0  # argument below omega_1^2
    out, raw = an.coverage_term(1.0, 0.0, 0.5, np.array([0.9, 0.3]), 0.5, dist, return_raw=True)
    assert np.all((out >= 0) & (out <= 1))


@pytest.fixture(scope="module")
def loc3():
    return an.LocationAnalysis("square", representative_location("square", 3), SystemParams(),
                               epsilon=FAST_EPS)


def test_coverage_monotone_in_beta(loc3):
    betas = np.logspace(-1, 4.5, 60)
    curve = loc3.coverage_curve(betas)
    assert np.all(np.diff(curve) <= 1e-12)
    assert curve[0] == pytest.approx(loc3.association.total)


def test_pointing_error_below_perfect_alignment(loc3):
    betas = np.logspace(-1, 4.5, 60)
    assert np.all(loc3.coverage_curve(betas) <= loc3.coverage_perfect_curve(betas) + 1e-12)
    assert loc3.coverage_perfect_curve([1e-6])[0] == pytest.approx(loc3.association.total)
    assert loc3.coverage_perfect_curve([1e9])[0] == 0.0


def test_coverage_result_structure(ref_params):
    ue = representative_location("square", 2)
    res = an.coverage_at_location("square", ue, 100.0, ref_params, epsilon=FAST_EPS)
    assert res.p_c == pytest.approx(sum(pa * cc for _, pa, cc in res.per_ap_terms))
    with pytest.raises(ValueError):
        an.coverage_at_location("square", ue, 0.0, ref_params)


def test_coverage_without_blockage_near_one(ref_params):
    p = ref_params.replace(lambda_W=0.0, lambda_B=0.0)
    assert an.coverage_at_location("square", UeLocation(0, 0), 1e-3, p, FAST_EPS).p_c == pytest.approx(1.0)


def test_average_coverage_normalisation(ref_params):
    assert an.average_coverage("square", 1.0, ref_params, 64, integrand=lambda ue: 0.7) == pytest.approx(0.7)
    assert an.average_coverage("hexagonal", 1.0, ref_params, 64, integrand=lambda ue: 0.7) == pytest.approx(0.7)
    assert an.average_coverage_integral("square", 1.0, ref_params, 64, integrand=lambda ue: 1.0) == \
        pytest.approx(1 / 8)
    with pytest.raises(ValueError):
        an.average_coverage("square", 1.0, ref_params, 9)


def test_average_coverage_without_blockage(ref_params):
    p = ref_params.replace(lambda_W=0.0, lambda_B=0.0)
    assert an.average_coverage("square", 1e-3, p, 16, epsilon=1e-18) == pytest.approx(1.0)


def test_density_mapping():
    assert an.d_ap_for_density("square", 2e-2) / an.d_ap_for_density("square", 1e-2) == \
        pytest.approx(1 / math.sqrt(2))
    assert an.d_ap_for_density("hexagonal", 1.0) == pytest.approx(math.sqrt(2 / math.sqrt(3)))
    with pytest.raises(ValueError):
        an.d_ap_for_density("square", 0.0)
