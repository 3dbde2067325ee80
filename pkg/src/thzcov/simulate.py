"""Monte Carlo oracle for association, interference and coverage.

Every random quantity is drawn from the counter-based streams in
:mod:`thzcov.rng`, keyed by (seed, trial, stream, counter):

* ``walls_x`` / ``walls_y``: gaps of the two wall line processes, walking
  outward from the UE (counter 2m on the positive side, 2m+1 on the negative
  side, m = 0, 1, ...).
* ``humans``: one uniform per AP (counter = AP position in association
  order) for the independent human model.
* ``human_pos``: body count and positions for the geometric human model.
* ``beam``: the two angular offsets of the serving beam.

Only the nearest wall on each side of the UE can block a link that starts
at the UE, so the vectorised estimators draw just the first gap per side.
The scalar :func:`realize_scene` path draws the complete wall lists from the
same counters and therefore sees the same nearest walls.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

from . import rng
from .analysis import truncation_radius
from .antenna import pointing_loss_from_offsets
from .channel import interferer_power, peak_power
from .geometry import ApIndex, LinkArrays, UeLocation, lattice_links, ue_position
from .params import SystemParams

BLOCK_SIZE = 4096
# simulation truncation: drop APs whose total mean contribution is below this
# fraction of one nearest-neighbour interferer
SIM_TRUNC_REL = 1e-3
HUMAN_MODELS = ("independent", "geometric")
PE_MODELS = ("gaussian", "array_factor", "none")


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width_95: float
    n_trials: int

    @property
    def std_error(self) -> float:
        return self.half_width_95 / 1.96

    def contains(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(value - self.mean) <= n_sigma * self.std_error


@dataclass
class Scene:
    """One realisation of walls, bodies and APs around the UE (metres)."""

    walls_x: np.ndarray
    walls_y: np.ndarray
    humans: np.ndarray
    ap_positions: np.ndarray
    ue_position: tuple
    window: tuple
    ap_indices: list = field(default_factory=list)
    human_u: np.ndarray | None = None
    human_model: str = "independent"


@dataclass(frozen=True)
class TrialOutcome:
    associated: ApIndex | None
    sinr: float
    pointing_loss: float
    interference: float = 0.0


@dataclass(frozen=True)
class SinrSamples:
    """Per-trial results in trial order; ``serving`` is -1 when no AP is reachable."""

    sinr: np.ndarray
    serving: np.ndarray
    interference: np.ndarray
    links: LinkArrays | None
    radius: float
    seed: int

    @property
    def n_trials(self) -> int:
        return len(self.sinr)


def bernoulli_estimate(hits: np.ndarray) -> Estimate:
    n = len(hits)
    m = float(np.mean(hits))
    return Estimate(m, 1.96 * math.sqrt(max(m * (1 - m), 0.0) / n), n)


def mean_estimate(x: np.ndarray) -> Estimate:
    n = len(x)
    return Estimate(float(np.mean(x)), 1.96 * float(np.std(x, ddof=1)) / math.sqrt(n), n)


def variance_estimate(x: np.ndarray) -> Estimate:
    n = len(x)
    dev2 = (x - np.mean(x)) ** 2
    return Estimate(float(np.var(x, ddof=1)), 1.96 * float(np.std(dev2, ddof=1)) / math.sqrt(n), n)


def sim_radius(params: SystemParams, topology: str | None = None, rel: float = SIM_TRUNC_REL) -> float:
    topology = topology or params.topology
    if topology == "ppp":
        topology = "square"
    return truncation_radius(params, rel * interferer_power(params.d_AP, params), topology)


def ppp_radius(params: SystemParams, lambda_A: float, rel: float = SIM_TRUNC_REL) -> float:
    """Disc radius for the PPP baseline: dropped interference below ``rel`` of the
    larger of the noise and one interferer at the mean spacing."""
    p = params.replace(d_AP=1.0 / math.sqrt(lambda_A))
    eps = rel * max(interferer_power(p.d_AP, p), p.N_0)
    return truncation_radius(p, eps, "square")


# -- scenes and single trials ------------------------------------------------------

def _wall_line(seed, trial, stream, origin, half_width, rate):
    """Wall coordinates on one axis inside [origin - half_width, origin + half_width]."""
    if rate == 0:
        return np.zeros(0)
    keys = rng.trial_keys(seed, np.array([trial]), stream)[0]
    out = []
    for side, sign in ((0, 1.0), (1, -1.0)):
        pos, m = 0.0, 0
        while True:
            pos += -math.log(float(rng.uniform_from_keys(keys, np.uint64(2 * m + side)))) / rate
            if pos > half_width:
                break
            out.append(origin + sign * pos)
            m += 1
    return np.sort(np.array(out))


def _human_reach(params: SystemParams, radius: float) -> float:
    dc = params.derived
    return radius * (params.h_B - params.h_U) / dc.delta_h + params.R_B


def realize_scene(seed: int, trial_index: int, topology: str, ue: UeLocation,
                  params: SystemParams, radius: float | None = None,
                  human_model: str = "independent", lambda_A: float | None = None) -> Scene:
    """Draw the walls, bodies and (for ``ppp``) AP positions of one trial."""
    if human_model not in HUMAN_MODELS:
        raise ValueError(f"human_model must be one of {HUMAN_MODELS}")
    radius = sim_radius(params, topology) if radius is None else radius
    if topology == "ppp":
        ue_xy = (0.0, 0.0)
        xy = _ppp_positions(seed, np.array([trial_index]), radius,
                            lambda_A if lambda_A is not None else params.d_AP ** -2)[1]
        indices = []
    else:
        links = lattice_links(topology, ue, radius, params.d_AP)
        ue_xy = ue_position(topology, ue, params.d_AP)
        xy = np.column_stack([ue_xy[0] - links.sx, ue_xy[1] - links.sy])
        indices = [links.index(k) for k in range(len(links))]
    half = radius + params.R_B
    walls_x = _wall_line(seed, trial_index, "walls_x", ue_xy[0], half, params.lambda_W)
    walls_y = _wall_line(seed, trial_index, "walls_y", ue_xy[1], half, params.lambda_W)

    humans = np.zeros((0, 2))
    human_u = None
    if human_model == "geometric":
        reach = _human_reach(params, radius)
        g = rng.CounterGenerator(seed, trial_index, "human_pos")
        n_h = int(poisson.ppf(g.random(), params.lambda_B * (2 * reach) ** 2))
        pts = g.uniform(-reach, reach, size=(n_h, 2)) if n_h else np.zeros((0, 2))
        humans = pts + np.asarray(ue_xy)
    else:
        human_u = rng.uniform(seed, np.int64(trial_index), "humans", np.arange(len(xy), dtype=np.uint64))
    return Scene(walls_x=walls_x, walls_y=walls_y, humans=humans, ap_positions=xy,
                 ue_position=tuple(ue_xy), window=(ue_xy[0] - half, ue_xy[0] + half,
                                                    ue_xy[1] - half, ue_xy[1] + half),
                 ap_indices=indices, human_u=human_u, human_model=human_model)


def wall_blocked(scene: Scene, k: int) -> bool:
    """True iff a wall line lies strictly between the UE and AP ``k`` on either axis."""
    ux, uy = scene.ue_position
    ax, ay = scene.ap_positions[k]
    lo, hi = min(ux, ax), max(ux, ax)
    if np.any((scene.walls_x > lo) & (scene.walls_x < hi)):
        return True
    lo, hi = min(uy, ay), max(uy, ay)
    return bool(np.any((scene.walls_y > lo) & (scene.walls_y < hi)))


def human_blocked(scene: Scene, k: int, params: SystemParams) -> bool:
    ux, uy = scene.ue_position
    ax, ay = scene.ap_positions[k]
    d = math.hypot(ax - ux, ay - uy)
    if d == 0:
        return False
    if scene.human_model == "independent":
        return bool(scene.human_u[k] >= math.exp(-params.derived.alpha * d))
    # rectangle of width 2 R_B from the UE toward the AP
    length = d * (params.h_B - params.h_U) / params.derived.delta_h
    ex, ey = (ax - ux) / d, (ay - uy) / d
    rx, ry = scene.humans[:, 0] - ux, scene.humans[:, 1] - uy
    along = rx * ex + ry * ey
    across = -rx * ey + ry * ex
    return bool(np.any((along >= 0) & (along <= length) & (np.abs(across) <= params.R_B)))


def beam_offsets(seed: int, trials, omega_T: float):
    u = rng.uniform(seed, np.asarray(trials)[..., None], "beam", np.arange(2, dtype=np.uint64))
    return omega_T * (2 * u[..., 0] - 1), omega_T * (2 * u[..., 1] - 1)


def _pointing_loss(seed, trials, params, pe_model):
    if pe_model == "none":
        return np.ones(np.shape(trials))
    th, tv = beam_offsets(seed, trials, params.omega_T)
    return np.asarray(pointing_loss_from_offsets(tv, th, pe_model, params.N_A), dtype=float)


def run_trial(seed: int, trial_index: int, topology: str, ue: UeLocation, beta: float,
              params: SystemParams, pe_model: str = "gaussian", radius: float | None = None,
              human_model: str = "independent", lambda_A: float | None = None) -> TrialOutcome:
    """Scalar reference implementation of one trial."""
    scene = realize_scene(seed, trial_index, topology, ue, params, radius, human_model, lambda_A)
    ux, uy = scene.ue_position
    d = np.hypot(scene.ap_positions[:, 0] - ux, scene.ap_positions[:, 1] - uy)
    unblocked = np.array([not (wall_blocked(scene, k) or human_blocked(scene, k, params))
                          for k in range(len(d))], dtype=bool)
    if topology == "ppp":
        order = np.argsort(d, kind="stable")
        d, unblocked = d[order], unblocked[order]
    cand = np.flatnonzero(unblocked & (d <= params.R_A * (1 + 1e-12)))
    h = float(_pointing_loss(seed, np.array([trial_index]), params, pe_model)[0])
    if len(cand) == 0:
        return TrialOutcome(None, 0.0, h, 0.0)
    s = int(cand[0])
    interf = float(np.sum(interferer_power(d[s + 1:][unblocked[s + 1:]], params)))
    sinr = peak_power(d[s], params) * h / (interf + params.N_0)
    return TrialOutcome(scene.ap_indices[s] if scene.ap_indices else None, sinr, h, interf)


# -- vectorised blocks -------------------------------------------------------------------

def _nearest_walls(seed, trials, lam):
    """First wall distance on the +x, -x, +y, -y sides, shape (T, 4)."""
    if lam == 0:
        return np.full((len(trials), 4), np.inf)
    cnt = np.arange(2, dtype=np.uint64)
    gx = -np.log(rng.uniform(seed, trials[:, None], "walls_x", cnt)) / lam
    gy = -np.log(rng.uniform(seed, trials[:, None], "walls_y", cnt)) / lam
    return np.concatenate([gx, gy], axis=1)


def wall_blocked_matrix(seed: int, trials, sx, sy, lambda_W: float) -> np.ndarray:
    """(T, n) wall-blocked indicators for links with UE-minus-AP offsets ``sx``, ``sy``."""
    trials = np.asarray(trials, dtype=np.int64)
    g = _nearest_walls(seed, trials, lambda_W)
    sx = np.asarray(sx, dtype=float)[None, :]
    sy = np.asarray(sy, dtype=float)[None, :]
    # AP on the +x side of the UE when sx < 0
    bx = np.where(sx < 0, g[:, 0:1] < -sx, np.where(sx > 0, g[:, 1:2] < sx, False))
    by = np.where(sy < 0, g[:, 2:3] < -sy, np.where(sy > 0, g[:, 3:4] < sy, False))
    return bx | by


def _grid_unblocked(seed, trials, links: LinkArrays, params: SystemParams):
    blocked = wall_blocked_matrix(seed, trials, links.sx, links.sy, params.lambda_W)
    u = rng.uniform(seed, trials[:, None], "humans", np.arange(len(links), dtype=np.uint64)[None, :])
    ph = np.exp(-params.derived.alpha * links.d)[None, :]
    return ~blocked & (u < ph), ~blocked


def _first_true(mask: np.ndarray) -> np.ndarray:
    has = mask.any(axis=1)
    return np.where(has, np.argmax(mask, axis=1), -1)


def _grid_block(args):
    seed, start, stop, links, params, pe_model, need_interference = args
    trials = np.arange(start, stop, dtype=np.int64)
    unb, _ = _grid_unblocked(seed, trials, links, params)
    in_range = links.d <= params.R_A * (1 + 1e-12)
    serving = _first_true(unb & in_range[None, :])
    T = len(trials)
    interf = np.zeros(T)
    if need_interference:
        contrib = unb * interferer_power(links.d, params)[None, :]
        after = np.cumsum(contrib[:, ::-1], axis=1)[:, ::-1]  # after[t, k] = sum over l >= k
        after = np.concatenate([after, np.zeros((T, 1))], axis=1)
        interf = np.where(serving >= 0, after[np.arange(T), serving + 1], 0.0)
    h = _pointing_loss(seed, trials, params, pe_model)
    zeta = np.where(serving >= 0, peak_power(links.d[np.maximum(serving, 0)], params), 0.0)
    sinr = zeta * h / (interf + params.N_0)
    return sinr, serving, interf


def _run_blocks(fn, seed, n_trials, extra, workers):
    bounds = [(s, min(n_trials, s + BLOCK_SIZE)) for s in range(0, n_trials, BLOCK_SIZE)]
    jobs = [(seed, a, b) + tuple(extra) for a, b in bounds]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, jobs))
    else:
        parts = [fn(j) for j in jobs]
    return [np.concatenate([p[i] for p in parts]) for i in range(len(parts[0]))]


def _check_common(n_trials, pe_model, min_trials=1):
    if n_trials < min_trials:
        raise ValueError(f"n_trials must be >= {min_trials}")
    if pe_model not in PE_MODELS:
        raise ValueError(f"pe_model must be one of {PE_MODELS}")


def simulate_sinr(topology: str, ue: UeLocation, params: SystemParams, n_trials: int,
                  seed: int, pe_model: str = "gaussian", radius: float | None = None,
                  workers: int = 1, need_interference: bool = True) -> SinrSamples:
    """Per-trial SINR under the independent human model; reusable for any threshold."""
    _check_common(n_trials, pe_model)
    if topology not in ("square", "hexagonal"):
        raise ValueError("simulate_sinr handles lattice topologies; use ppp_baseline_coverage")
    radius = sim_radius(params, topology) if radius is None else radius
    links = lattice_links(topology, ue, radius, params.d_AP)
    sinr, serving, interf = _run_blocks(_grid_block, seed, n_trials,
                                        (links, params, pe_model, need_interference), workers)
    return SinrSamples(sinr, serving, interf, links, radius, seed)


def coverage_from_samples(samples: SinrSamples, beta):
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    out = [bernoulli_estimate(samples.sinr > b) for b in betas]
    return out if np.ndim(beta) else out[0]


def estimate_coverage(topology: str, ue: UeLocation, beta, params: SystemParams,
                      n_trials: int, seed: int, pe_model: str = "gaussian",
                      radius: float | None = None, workers: int = 1,
                      human_model: str = "independent"):
    """Fraction of trials with SINR above ``beta`` (a list of estimates for array ``beta``)."""
    _check_common(n_trials, pe_model, 1000)
    if human_model == "geometric":
        betas = np.atleast_1d(np.asarray(beta, dtype=float))
        radius = sim_radius(params, topology) if radius is None else radius
        s = np.array([run_trial(seed, t, topology, ue, 1.0, params, pe_model, radius, "geometric").sinr
                      for t in range(n_trials)])
        out = [bernoulli_estimate(s > b) for b in betas]
        return out if np.ndim(beta) else out[0]
    samples = simulate_sinr(topology, ue, params, n_trials, seed, pe_model, radius, workers)
    return coverage_from_samples(samples, beta)


def estimate_association(topology: str, ue: UeLocation, params: SystemParams, n_trials: int,
                         seed: int, workers: int = 1) -> dict:
    """Empirical association frequency of every AP within R_A, plus ``None`` for no AP."""
    s = simulate_sinr(topology, ue, params, n_trials, seed, "none", radius=params.R_A,
                      workers=workers, need_interference=False)
    out = {s.links.index(k): bernoulli_estimate(s.serving == k) for k in range(len(s.links))}
    out[None] = bernoulli_estimate(s.serving < 0)
    return out


def _moment_block(args):
    seed, start, stop, links, k_serv, params = args
    trials = np.arange(start, stop, dtype=np.int64)
    unb, wall_ok = _grid_unblocked(seed, trials, links, params)
    mask = links.tie >= links.tie[k_serv]
    mask[k_serv] = False
    w = np.where(mask, interferer_power(links.d, params), 0.0)
    interf = (unb * w[None, :]).sum(axis=1)
    accepted = wall_ok[:, k_serv]
    return (interf[accepted],)


def estimate_interference_moments(topology: str, ue: UeLocation, serving, params: SystemParams,
                                  n_trials: int, seed: int, radius: float | None = None,
                                  workers: int = 1):
    """Mean and variance of the interference given the serving link is wall-free.

    Trials where a wall cuts the serving link are discarded. Returns
    ``(mean, variance)`` estimates; ``n_trials`` on them is the accepted count.
    """
    radius = sim_radius(params, topology) if radius is None else radius
    links = lattice_links(topology, ue, radius, params.d_AP)
    k = links.position_of(serving)
    (x,) = _run_blocks(_moment_block, seed, n_trials, (links, k, params), workers)
    if len(x) < 2:
        raise RuntimeError("no trials satisfied the conditioning event")
    return mean_estimate(x), variance_estimate(x)


# -- PPP baseline -------------------------------------------------------------------------

def _ppp_counts(seed, trials, radius, lambda_A):
    u = rng.uniform(seed, trials, "ppp_count", np.uint64(0))
    return poisson.ppf(u, lambda_A * math.pi * radius * radius).astype(np.int64)


def _ppp_positions(seed, trials, radius, lambda_A):
    """(owner trial per AP, xy) for the APs of each trial, uniform in a disc around the UE."""
    counts = _ppp_counts(seed, trials, radius, lambda_A)
    owner = np.repeat(trials, counts)
    starts = np.cumsum(counts) - counts
    local = np.arange(len(owner)) - np.repeat(starts, counts)
    keys = rng.trial_keys(seed, owner, "ppp_pos")
    r = radius * np.sqrt(rng.uniform_from_keys(keys, (2 * local).astype(np.uint64)))
    phi = 2 * math.pi * rng.uniform_from_keys(keys, (2 * local + 1).astype(np.uint64))
    return owner, np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _ppp_block(args):
    seed, start, stop, radius, lambda_A, params, pe_model = args
    trials = np.arange(start, stop, dtype=np.int64)
    T = len(trials)
    counts = _ppp_counts(seed, trials, radius, lambda_A)
    owner, xy = _ppp_positions(seed, trials, radius, lambda_A)
    local = np.arange(len(owner)) - np.repeat(np.cumsum(counts) - counts, counts)
    sx, sy = -xy[:, 0], -xy[:, 1]
    d = np.hypot(sx, sy)
    g = _nearest_walls(seed, trials, params.lambda_W)[owner - start]
    bx = np.where(sx < 0, g[:, 0] < -sx, g[:, 1] < sx)
    by = np.where(sy < 0, g[:, 2] < -sy, g[:, 3] < sy)
    u = rng.uniform_from_keys(rng.trial_keys(seed, owner, "humans"), local.astype(np.uint64))
    unb = ~(bx | by) & (u < np.exp(-params.derived.alpha * d))

    # sort APs by distance inside each trial
    order = np.lexsort((d, owner))
    owner, d, unb = owner[order], d[order], unb[order]
    pos = np.arange(len(owner))
    cand = unb & (d <= params.R_A)
    first = np.full(T, len(owner), dtype=np.int64)
    np.minimum.at(first, owner[cand] - start, pos[cand])
    has = first < len(owner)
    after = pos > first[owner - start]
    w = interferer_power(d, params)
    interf = np.bincount(owner - start, weights=w * (unb & after), minlength=T)
    h = _pointing_loss(seed, trials, params, pe_model)
    zeta = np.zeros(T)
    zeta[has] = peak_power(d[first[has]], params)
    sinr = zeta * h / (interf + params.N_0)
    return sinr, np.where(has, 0, -1), interf


def ppp_baseline_coverage(lambda_A: float, beta, params: SystemParams, n_trials: int, seed: int,
                          pe_model: str = "gaussian", radius: float | None = None,
                          workers: int = 1):
    """Coverage with AP positions redrawn every trial as a 2D PPP of density ``lambda_A``."""
    if lambda_A <= 0:
        raise ValueError("lambda_A must be positive")
    _check_common(n_trials, pe_model)
    if radius is None:
        radius = ppp_radius(params, lambda_A)
    sinr, _, _ = _run_blocks(_ppp_block, seed, n_trials,
                             (radius, lambda_A, params, pe_model), workers)
    betas = np.atleast_1d(np.asarray(beta, dtype=float))
    out = [bernoulli_estimate(sinr > b) for b in betas]
    return out if np.ndim(beta) else out[0]
