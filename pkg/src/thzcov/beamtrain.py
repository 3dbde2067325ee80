"""Hierarchical beam-training overhead.

A training stage transmits N_ct beams at once from one AP. Splitting the
power over more beams raises intra-AP leakage, so the cell-edge SINR
requirement caps N_ct; the stage count is the depth of an N_ct-ary
refinement tree over all beams needed to tile the coverage cone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0

from .analysis import truncation_radius
from .channel import path_gain
from .geometry import lattice_links, representative_location
from .params import SystemParams


class TrainingInfeasible(RuntimeError):
    """The training SINR target cannot be met, or no hierarchical reduction is possible."""


@dataclass(frozen=True)
class TrainingBudget:
    I_intra: float
    I_inter: float
    eta: float
    N_ct_max: int
    N_ct: int
    N_BT: int
    beam_count: float


def _W(params: SystemParams, d):
    return path_gain(d, params.derived.delta_h, params.eps_f)


def intra_interference(params: SystemParams, N_ct: int) -> float:
    if N_ct < 1:
        raise ValueError("N_ct must be >= 1")
    dc = params.derived
    return (N_ct - 1) / N_ct * params.P_t * dc.G_S * dc.xi * _W(params, params.R_A)


def inter_interference_exact(topology: str, params: SystemParams, bare: bool = False,
                             epsilon: float | None = None) -> float:
    """Mean power from APs beyond R_A, seen from the cell-edge UE.

    The default includes the sidelobe gain and the wall-unblocked factor;
    ``bare=True`` keeps only the human-blockage factor and no G_S.
    """
    dc = params.derived
    radius = max(2 * params.R_A, truncation_radius(params, epsilon, topology))
    links = lattice_links(topology, representative_location(topology, 3), radius, params.d_AP)
    far = links.d > params.R_A
    d = links.d[far]
    p = np.exp(-dc.alpha * d)
    if not bare:
        p = p * np.exp(-params.lambda_W * (np.abs(links.sx[far]) + np.abs(links.sy[far])))
    gain = 1.0 if bare else dc.G_S
    return float(params.P_t * gain * dc.xi * np.sum(p * _W(params, d)))


def inter_interference_approx(params: SystemParams) -> float:
    """Continuum approximation with a Bessel factor for the wall term."""
    dc = params.derived
    rate = dc.alpha + params.eps_f
    if rate <= 0:
        raise ValueError("approximation needs alpha + eps_f > 0")
    R = params.R_A
    return float(2 * math.pi * params.P_t * dc.G_S * dc.xi * R * math.exp(-dc.alpha * R)
                 * _W(params, R) / (params.d_AP ** 2 * rate) * i0(math.sqrt(2) * params.lambda_W * R))


def eta(params: SystemParams, exact: bool = False, topology: str | None = None) -> float:
    topology = topology or params.topology
    I = inter_interference_exact(topology, params) if exact else inter_interference_approx(params)
    return (I + params.N_0) / (params.P_t * params.derived.xi * _W(params, params.R_A))


def max_concurrent_beams_raw(params: SystemParams, exact: bool = False,
                             topology: str | None = None) -> int:
    dc = params.derived
    b = params.beta_ct
    if b <= 0:
        raise ValueError("beta_ct must be positive")
    num = dc.omega_1 ** 2 * dc.G_max + b * dc.G_S
    return int(math.floor(num / (b * (dc.G_S + eta(params, exact, topology)))))


def max_concurrent_beams(params: SystemParams, exact: bool = False,
                         topology: str | None = None) -> int:
    n = max_concurrent_beams_raw(params, exact, topology)
    if n < 1:
        raise TrainingInfeasible(
            f"cell-edge training SINR {params.beta_ct:.4g} unreachable even with a single beam "
            f"(N_ct_max = {n})")
    return n


def beam_count(params: SystemParams) -> float:
    """Number of finest-level beams of half-width omega_T needed to cover the coverage cone."""
    return 4 * math.pi * math.atan(params.R_A / params.derived.delta_h) / params.omega_T ** 2


def stages_for(count: float, N_ct: int) -> int:
    if N_ct < 2:
        raise TrainingInfeasible("N_ct = 1: no hierarchical reduction possible")
    if count <= 1:
        return 1
    # guard against log rounding right at integer powers
    n = math.ceil(math.log(count) / math.log(N_ct) - 1e-12)
    return max(1, n)


def training_stages(params: SystemParams, N_ct: int | None = None, exact: bool = False) -> int:
    if N_ct is None:
        N_ct = min(max_concurrent_beams(params, exact), params.N_RF)
    return stages_for(beam_count(params), N_ct)


def training_budget(params: SystemParams, exact: bool = False) -> TrainingBudget:
    I_inter = (inter_interference_exact(params.topology, params) if exact
               else inter_interference_approx(params))
    n_max = max_concurrent_beams(params, exact)
    n_ct = min(n_max, params.N_RF)
    return TrainingBudget(I_intra=intra_interference(params, n_ct), I_inter=I_inter,
                          eta=eta(params, exact), N_ct_max=n_max, N_ct=n_ct,
                          N_BT=stages_for(beam_count(params), n_ct), beam_count=beam_count(params))


def stages_vs_array(params: SystemParams, N_A_grid, omega_mode: str = "tied",
                    kappa: float | None = None, exact: bool = False):
    """N_BT over an AP array-size sweep; ``math.inf`` where training is infeasible.

    ``tied``: omega_T = kappa * 1.06 / N_A (kappa defaults to the value that
    reproduces params.omega_T at params.N_A). ``fixed``: omega_T stays put.
    """
    if omega_mode not in ("tied", "fixed"):
        raise ValueError("omega_mode must be 'tied' or 'fixed'")
    if kappa is None:
        kappa = params.omega_T * params.N_A / 1.06
    out = []
    for n in N_A_grid:
        n = int(n)
        wt = kappa * 1.06 / n if omega_mode == "tied" else params.omega_T
        try:
            p = params.replace(N_A=n, omega_T=wt)
            out.append(training_stages(p, exact=exact))
        except (TrainingInfeasible, ValueError):
            out.append(math.inf)
    return out
