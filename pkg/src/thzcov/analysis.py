"""Closed-form coverage engine.

Pipeline per UE location: enumerate the lattice, compute the probability of
associating with each AP inside R_A (inclusion-exclusion over closer APs
with exact joint wall statistics), the conditional mean/variance of the
aggregate sidelobe interference, and combine them with the pointing-error
law through a second-order expansion in the interference.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import exp1

from .antenna import PointingErrorDist
from .blockage import excess_over, side_extents
from .channel import interferer_power, path_gain, peak_power
from .geometry import (ApIndex, LinkArrays, UeLocation, fundamental_region_quadrature,
                       grid_constants, lattice_links, region_area, representative_location)
from .params import SystemParams

log = logging.getLogger(__name__)

# default truncation: tail below this fraction of one nearest-neighbour interferer
DEFAULT_TRUNC_REL = 1e-12
MAX_CLOSER_APS = 20
_COV_CHUNK = 256


class CombinatorialBlowup(RuntimeError):
    """Inclusion-exclusion would need more than 2**cap terms."""


@dataclass(frozen=True)
class InterferenceStats:
    mu: float
    sigma2: float
    truncation_radius: float
    truncation_tail_bound: float
    n_interferers: int = 0


@dataclass(frozen=True)
class AssociationTable:
    entries: list

    @property
    def total(self) -> float:
        return math.fsum(p for _, p in self.entries)

    def prob(self, idx) -> float:
        for k, p in self.entries:
            if k == tuple(idx):
                return p
        return 0.0


@dataclass(frozen=True)
class CoverageResult:
    p_c: float
    per_ap_terms: list


# -- truncation ---------------------------------------------------------------

def _cell_geometry(topology: str, d_AP: float) -> tuple[float, float]:
    """(cell area, cell circumradius) of the AP lattice."""
    _, c2 = grid_constants(topology)
    circ = d_AP / math.sqrt(2.0) if topology == "square" else d_AP / math.sqrt(3.0)
    return c2 * d_AP * d_AP, circ


def tail_bound(params: SystemParams, radius: float, topology: str | None = None) -> float:
    """Upper bound on the total mean sidelobe power from APs farther than ``radius``.

    Every unblocked-probability-weighted gain p*W(d) is below
    exp(-(alpha + lambda_W + eps_f) d) / d^2 (since d_x + d_y >= d). Comparing each
    lattice point with the integral over its Voronoi cell turns the sum into
    2*pi/A * E1(rate * (r - r_cell)) up to a cell-size factor.
    """
    topology = topology or params.topology
    area, circ = _cell_geometry(topology, params.d_AP)
    rate = params.derived.alpha + params.lambda_W + params.eps_f
    if rate <= 0:
        return math.inf
    if radius <= circ:
        return math.inf
    scale = params.P_t * params.derived.G_S * params.derived.xi
    growth = math.exp(rate * circ) * (1.0 + circ / radius) ** 2
    return scale * growth * 2.0 * math.pi * exp1(rate * (radius - circ)) / area


def default_epsilon(params: SystemParams) -> float:
    return DEFAULT_TRUNC_REL * interferer_power(params.d_AP, params)


def truncation_radius(params: SystemParams, epsilon: float | None = None,
                      topology: str | None = None) -> float:
    """Smallest multiple of d_AP (never below R_A) whose tail bound is under ``epsilon`` watts."""
    topology = topology or params.topology
    eps = default_epsilon(params) if epsilon is None else epsilon
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    rate = params.derived.alpha + params.lambda_W + params.eps_f
    if rate <= 0:
        raise ValueError("interference sum diverges without absorption or blockage")
    k = 1
    while tail_bound(params, k * params.d_AP, topology) >= eps:
        k *= 2
    lo, hi = k // 2, k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_bound(params, mid * params.d_AP, topology) < eps:
            hi = mid
        else:
            lo = mid
    return max(params.R_A, hi * params.d_AP)


# -- interference moments -------------------------------------------------------

def _pair_cov_sum(u: np.ndarray, c: np.ndarray, lam: float) -> float:
    """sum_{k != l} u_k u_l (exp(lam * sum_side min(c_k, c_l)) - 1)."""
    n = len(u)
    if n < 2 or lam == 0:
        return 0.0
    total = 0.0
    for start in range(0, n, _COV_CHUNK):
        stop = min(n, start + _COV_CHUNK)
        shared = np.zeros((stop - start, n))
        for s in range(4):
            shared += np.minimum(c[start:stop, s, None], c[None, :, s])
        block = np.expm1(lam * shared)
        total += float(u[start:stop] @ (block @ u))
    diag = float(np.sum(u * u * np.expm1(lam * c.sum(axis=1))))
    return total - diag


def _min_kernel_1d(u: np.ndarray, a: np.ndarray, lam: float) -> float:
    """sum_{k != l} u_k u_l (exp(lam * min(a_k, a_l)) - 1)."""
    order = np.argsort(a, kind="stable")
    us, fa = u[order], np.expm1(lam * a[order])
    after = np.cumsum(us[::-1])[::-1] - us  # sum over later (larger a) entries
    return 2.0 * float(np.sum(us * fa * after))


def _min_kernel_2d(u: np.ndarray, a: np.ndarray, b: np.ndarray, lam: float) -> float:
    """sum_{k != l} u_k u_l (e^{lam min(a_k,a_l)} - 1)(e^{lam min(b_k,b_l)} - 1).

    Sweep in increasing a: for the pair (k, l) with l later, min a = a_k, and
    the b factor splits by whether b_l >= b_k. Later entries are kept in
    dense arrays indexed by b-rank, refreshed once per chunk, so the cost is
    O(n^1.5) instead of O(n^2).
    """
    n = len(u)
    if n < 2:
        return 0.0
    order = np.argsort(a, kind="stable")
    u, a, b = u[order], a[order], b[order]
    fa, gb = np.expm1(lam * a), np.expm1(lam * b)
    rank = np.empty(n, dtype=np.int64)
    rank[np.argsort(b, kind="stable")] = np.arange(n)
    dense_u = np.zeros(n)
    dense_ug = np.zeros(n)
    chunk = max(32, int(math.sqrt(n)))
    total = 0.0
    for stop in range(n, 0, -chunk):
        start = max(0, stop - chunk)
        sl = slice(start, stop)
        r = rank[sl]
        # later chunks already inserted: suffix sums over b-rank
        suf_u = np.cumsum(dense_u[::-1])[::-1]
        pre_ug = np.concatenate(([0.0], np.cumsum(dense_ug)))
        inner = gb[sl] * suf_u[r] + pre_ug[r]
        # pairs inside the chunk with l after k
        gmin = np.expm1(lam * np.minimum(b[sl, None], b[None, sl]))
        tri = np.triu(gmin * u[None, sl], k=1)
        inner = inner + tri.sum(axis=1)
        total += float(np.sum(u[sl] * fa[sl] * inner))
        dense_u[r] = u[sl]
        dense_ug[r] = u[sl] * gb[sl]
    return 2.0 * total


def pair_cov_sum(u: np.ndarray, c: np.ndarray, lam: float) -> float:
    """Fast exact form of :func:`_pair_cov_sum`.

    Each excess vector has at most one non-zero x side and one non-zero y
    side, so exp(lam*S) - 1 = X + Y + XY with X, Y one-axis min-kernels; XY
    only survives for pairs in the same quadrant.
    """
    if len(u) < 2 or lam == 0:
        return 0.0
    a = c[:, 0] + c[:, 1]
    b = c[:, 2] + c[:, 3]
    sx = np.where(c[:, 0] > 0, 1, np.where(c[:, 1] > 0, -1, 0))
    sy = np.where(c[:, 2] > 0, 1, np.where(c[:, 3] > 0, -1, 0))
    total = 0.0
    for s in (1, -1):
        m = sx == s
        total += _min_kernel_1d(u[m], a[m], lam)
        m = sy == s
        total += _min_kernel_1d(u[m], b[m], lam)
    for qx in (1, -1):
        for qy in (1, -1):
            m = (sx == qx) & (sy == qy)
            total += _min_kernel_2d(u[m], a[m], b[m], lam)
    return total


def interference_terms(links: LinkArrays, k_serv: int, params: SystemParams):
    """Per-interferer arrays (w, p_H, q, excess) for serving AP at position ``k_serv``."""
    mask = links.tie >= links.tie[k_serv]
    mask[k_serv] = False
    sub = links.subset(mask)
    ext = side_extents(links.sx, links.sy)
    c = excess_over(side_extents(sub.sx, sub.sy), ext[k_serv])
    w = interferer_power(sub.d, params)
    ph = np.exp(-params.derived.alpha * sub.d)
    q = np.exp(-params.lambda_W * c.sum(axis=1))
    return sub, w, ph, q, c


def interference_moments(topology: str, ue: UeLocation, serving, params: SystemParams,
                         epsilon: float | None = None) -> InterferenceStats:
    """Mean and variance of the sidelobe interference given the serving link is wall-free.

    Interferers are all APs at least as far as the serving one. Human
    blockage is independent across links; wall states are correlated through
    shared half-axes, handled exactly via the per-side excess lengths.
    """
    radius = truncation_radius(params, epsilon, topology)
    links = lattice_links(topology, ue, radius, params.d_AP)
    k = links.position_of(serving)
    if links.d[k] > params.R_A * (1 + 1e-12):
        raise ValueError(f"serving AP {tuple(serving)} lies outside the association radius")
    return _moments(links, k, params, radius, topology)


def _moments(links, k, params, radius, topology) -> InterferenceStats:
    sub, w, ph, q, c = interference_terms(links, k, params)
    hq = ph * q
    u = w * hq
    mu = float(np.sum(u))
    var_indep = float(np.sum(w * w * hq * (1.0 - hq)))
    var_cov = pair_cov_sum(u, c, params.lambda_W)
    return InterferenceStats(mu=mu, sigma2=var_indep + var_cov, truncation_radius=radius,
                             truncation_tail_bound=tail_bound(params, radius, topology),
                             n_interferers=len(sub))


# -- association -------------------------------------------------------------------

def _inclusion_exclusion(ext_target: np.ndarray, ph_target: float, ext_closer: np.ndarray,
                         ph_closer: np.ndarray, lam: float, joint: bool) -> float:
    """p_H(t) * sum over subsets Phi of closer APs of (-1)^|Phi| prod p_H * P(walls clear)."""
    acc_ext = ext_target[None, :].copy()
    coef = np.array([ph_target])
    for e, p in zip(ext_closer, ph_closer):
        if joint:
            new_ext = np.maximum(acc_ext, e)
        else:
            new_ext = acc_ext + e
        acc_ext = np.concatenate([acc_ext, new_ext])
        coef = np.concatenate([coef, -p * coef])
    return float(np.sum(coef * np.exp(-lam * acc_ext.sum(axis=1))))


def _association_from_links(links: LinkArrays, k: int, params: SystemParams,
                             joint: bool = True, cap: int = MAX_CLOSER_APS) -> float:
    if k > cap:
        raise CombinatorialBlowup(
            f"AP {links.index(k)} has {k} closer APs; inclusion-exclusion capped at {cap}")
    ext = side_extents(links.sx[: k + 1], links.sy[: k + 1])
    ph = np.exp(-params.derived.alpha * links.d[: k + 1])
    return _inclusion_exclusion(ext[k], ph[k], ext[:k], ph[:k], params.lambda_W, joint)


def _links_in_range(topology, ue, params) -> LinkArrays:
    return lattice_links(topology, ue, params.R_A, params.d_AP)


def association_prob(topology: str, ue: UeLocation, idx, params: SystemParams,
                     cap: int = MAX_CLOSER_APS) -> float:
    links = _links_in_range(topology, ue, params)
    try:
        k = links.position_of(idx)
    except KeyError:
        raise ValueError(f"AP {tuple(idx)} is outside the association radius") from None
    return _association_from_links(links, k, params, joint=True, cap=cap)


def association_prob_independent(topology: str, ue: UeLocation, idx, params: SystemParams,
                                 cap: int = MAX_CLOSER_APS) -> float:
    """Same event, but pretending wall blockages of different links are independent."""
    links = _links_in_range(topology, ue, params)
    try:
        k = links.position_of(idx)
    except KeyError:
        raise ValueError(f"AP {tuple(idx)} is outside the association radius") from None
    return _association_from_links(links, k, params, joint=False, cap=cap)


def association_table(topology: str, ue: UeLocation, params: SystemParams,
                      independent: bool = False, cap: int = MAX_CLOSER_APS) -> AssociationTable:
    links = _links_in_range(topology, ue, params)
    entries = [(links.index(k), _association_from_links(links, k, params, not independent, cap))
               for k in range(len(links))]
    return AssociationTable(entries)


# -- coverage ------------------------------------------------------------------------

def coverage_term(zeta: float, mu: float, sigma2: float, beta, noise: float,
                  dist: PointingErrorDist, return_raw: bool = False):
    """1 - F(x) - beta^2 sigma^2 / (2 zeta^2) f'(x) at x = (mu + N0) beta / zeta, clamped."""
    beta = np.asarray(beta, dtype=float)
    x = (mu + noise) * beta / zeta
    raw = 1.0 - dist.cdf(x) - beta ** 2 * sigma2 / (2.0 * zeta ** 2) * dist.pdf_derivative(x)
    raw = np.asarray(raw, dtype=float)
    out = np.clip(raw, 0.0, 1.0)
    if np.any(out != raw):
        log.debug("coverage term clamped; pre-clamp values %s", raw[out != raw])
    if return_raw:
        return out, raw
    return out if out.ndim else float(out)


@dataclass
class LocationAnalysis:
    """Association probabilities and interference moments for one UE location.

    Everything that does not depend on the SINR threshold is computed once,
    so threshold sweeps are cheap.
    """

    topology: str
    ue: UeLocation
    params: SystemParams
    epsilon: float | None = None
    independent_walls: bool = False
    _moments: dict = field(default_factory=dict, repr=False)

    @cached_property
    def links(self) -> LinkArrays:
        return _links_in_range(self.topology, self.ue, self.params)

    @cached_property
    def association(self) -> AssociationTable:
        return association_table(self.topology, self.ue, self.params,
                                 independent=self.independent_walls)

    @cached_property
    def radius(self) -> float:
        return truncation_radius(self.params, self.epsilon, self.topology)

    @cached_property
    def _far_links(self) -> LinkArrays:
        return lattice_links(self.topology, self.ue, self.radius, self.params.d_AP)

    def moments(self, idx) -> InterferenceStats:
        idx = ApIndex(*idx)
        if idx not in self._moments:
            far = self._far_links
            self._moments[idx] = _moments(far, far.position_of(idx), self.params,
                                          self.radius, self.topology)
        return self._moments[idx]

    @property
    def dist(self) -> PointingErrorDist:
        return PointingErrorDist(self.params.omega_T, self.params.derived.omega_A)

    def conditional_coverage(self, idx, beta, return_raw: bool = False):
        st = self.moments(idx)
        zeta = peak_power(self.links.d[self.links.position_of(idx)], self.params)
        return coverage_term(zeta, st.mu, st.sigma2, beta, self.params.N_0, self.dist, return_raw)

    def conditional_coverage_perfect(self, idx, beta):
        st = self.moments(idx)
        zeta = peak_power(self.links.d[self.links.position_of(idx)], self.params)
        out = ((st.mu + self.params.N_0) * np.asarray(beta, dtype=float) / zeta < 1.0).astype(float)
        return out if out.ndim else float(out)

    def coverage(self, beta) -> CoverageResult:
        terms, total = [], 0.0
        for idx, pa in self.association.entries:
            cc = self.conditional_coverage(idx, beta) if pa > 0 else 0.0
            terms.append((idx, pa, cc))
            total = total + pa * cc
        return CoverageResult(p_c=total, per_ap_terms=terms)

    def coverage_curve(self, betas, unclamped: bool = False) -> np.ndarray:
        """Coverage over ``betas``; ``unclamped`` sums the per-AP terms before clipping."""
        betas = np.asarray(betas, dtype=float)
        out = np.zeros_like(betas)
        for idx, pa in self.association.entries:
            if pa > 0:
                clamped, raw = self.conditional_coverage(idx, betas, return_raw=True)
                out += pa * (raw if unclamped else clamped)
        return out

    def coverage_perfect_curve(self, betas) -> np.ndarray:
        betas = np.asarray(betas, dtype=float)
        out = np.zeros_like(betas)
        for idx, pa in self.association.entries:
            if pa > 0:
                out += pa * self.conditional_coverage_perfect(idx, betas)
        return out


def conditional_coverage(topology: str, ue: UeLocation, serving, beta, params: SystemParams,
                         epsilon: float | None = None):
    if np.any(np.asarray(beta) <= 0):
        raise ValueError("SINR threshold must be positive (linear)")
    return LocationAnalysis(topology, ue, params, epsilon).conditional_coverage(serving, beta)


def coverage_at_location(topology: str, ue: UeLocation, beta, params: SystemParams,
                         epsilon: float | None = None) -> CoverageResult:
    if np.any(np.asarray(beta) <= 0):
        raise ValueError("SINR threshold must be positive (linear)")
    return LocationAnalysis(topology, ue, params, epsilon).coverage(beta)


def coverage_perfect_alignment(topology: str, ue: UeLocation, beta, params: SystemParams,
                               epsilon: float | None = None):
    out = LocationAnalysis(topology, ue, params, epsilon).coverage_perfect_curve(np.atleast_1d(beta))
    return out if np.ndim(beta) else float(out[0])


def average_coverage_integral(topology: str, beta, params: SystemParams, n_quad: int = 32 ** 2,
                              epsilon: float | None = None, integrand=None) -> float:
    """Unnormalised integral of the coverage over the fundamental region."""
    if n_quad < 16:
        raise ValueError("n_quad must be >= 16")
    if integrand is None:
        def integrand(ue):
            return LocationAnalysis(topology, ue, params, epsilon).coverage(beta).p_c
    nodes = fundamental_region_quadrature(topology, n_quad)
    return math.fsum(w * float(integrand(ue)) for ue, w in nodes)


def average_coverage(topology: str, beta, params: SystemParams, n_quad: int = 32 ** 2,
                     epsilon: float | None = None, integrand=None) -> float:
    """Coverage averaged uniformly over UE positions (integral / region area)."""
    return average_coverage_integral(topology, beta, params, n_quad, epsilon, integrand) \
        / region_area(topology)


def d_ap_for_density(topology: str, lambda_A: float) -> float:
    if lambda_A <= 0:
        raise ValueError("AP density must be positive")
    _, c2 = grid_constants(topology)
    return math.sqrt(1.0 / (c2 * lambda_A))


def coverage_vs_density(topology: str, location_id: int, beta: float, lambda_A_grid,
                        params: SystemParams, epsilon: float | None = None) -> np.ndarray:
    """Coverage at a representative location as the lattice is rescaled to each density.

    The UE keeps its fractional coordinates; only d_AP changes.
    """
    ue = representative_location(topology, location_id)
    out = []
    for lam in lambda_A_grid:
        p = params.replace(d_AP=d_ap_for_density(topology, lam), topology=topology)
        out.append(coverage_at_location(topology, ue, beta, p, epsilon).p_c)
    return np.array(out)


def nearest_distance(topology: str, ue: UeLocation, d_AP: float) -> float:
    return float(lattice_links(topology, ue, 1.5 * d_AP, d_AP).d[0])


__all__ = [
    "InterferenceStats", "AssociationTable", "CoverageResult", "CombinatorialBlowup",
    "LocationAnalysis", "tail_bound", "truncation_radius", "interference_moments",
    "association_prob", "association_prob_independent", "association_table",
    "conditional_coverage", "coverage_at_location", "coverage_perfect_alignment",
    "average_coverage", "average_coverage_integral", "coverage_vs_density",
    "d_ap_for_density", "coverage_term", "default_epsilon", "nearest_distance",
]
