"""Large-scale THz link gain, received power and SINR."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SystemParams


@dataclass(frozen=True)
class LinkBudget:
    W: float
    zeta: float
    noise: float


def path_gain(d, delta_h: float, eps_f: float):
    """W(d): spreading loss over the 3D distance times molecular absorption."""
    r2 = np.asarray(d, dtype=float) ** 2 + delta_h ** 2
    out = np.exp(-eps_f * np.sqrt(r2)) / r2
    return out if out.ndim else float(out)


def peak_power(d, params: SystemParams):
    """zeta: received power of a perfectly aligned, unblocked serving link."""
    dc = params.derived
    return params.P_t * dc.xi * dc.G_max * path_gain(d, dc.delta_h, params.eps_f)


def link_budget(d: float, params: SystemParams) -> LinkBudget:
    dc = params.derived
    W = path_gain(d, dc.delta_h, params.eps_f)
    return LinkBudget(W=W, zeta=params.P_t * dc.xi * dc.G_max * W, noise=params.N_0)


def serving_power(d, h_pe, params: SystemParams):
    h_pe = np.asarray(h_pe, dtype=float)
    if np.any((h_pe < 0) | (h_pe > 1)):
        raise ValueError("pointing loss must lie in [0, 1]")
    out = peak_power(d, params) * h_pe
    return out if np.ndim(out) else float(out)


def interferer_power(d, params: SystemParams):
    """Received power from an unblocked non-serving AP under the sidelobe cone model."""
    dc = params.derived
    return params.P_t * dc.G_S * dc.xi * path_gain(d, dc.delta_h, params.eps_f)


def sinr(serving, interference, noise):
    if np.any(np.asarray(noise) <= 0):
        raise ValueError("noise power must be positive")
    if np.any(np.asarray(interference) < 0):
        raise ValueError("interference power must be non-negative")
    out = np.asarray(serving, dtype=float) / (np.asarray(interference, dtype=float) + noise)
    return out if out.ndim else float(out)
