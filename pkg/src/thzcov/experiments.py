"""Experiment drivers producing result rows, and the CSV/JSON writers."""
from __future__ import annotations

import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .analysis import LocationAnalysis, d_ap_for_density, truncation_radius
from .antenna import PointingErrorDist, sample_pointing_loss
from .beamtrain import stages_vs_array
from .config import RunConfig
from .geometry import UeLocation, representative_location
from .params import db_to_linear
from .rng import CounterGenerator
from .simulate import (coverage_from_samples, estimate_association, ppp_baseline_coverage,
                       ppp_radius, simulate_sinr)

COLUMNS = ("experiment", "topology", "location_x", "location_y", "sweep_name", "sweep_value",
           "analytic", "sim_mean", "sim_ci95", "n_trials", "seed", "trunc_radius_m")


@dataclass
class ResultRow:
    experiment: str
    topology: str
    location_x: float | None
    location_y: float | None
    sweep_name: str
    sweep_value: float
    analytic: float | None = None
    sim_mean: float | None = None
    sim_ci95: float | None = None
    n_trials: int | None = None
    seed: int | None = None
    trunc_radius_m: float | None = None
    passed: bool | None = None


def _ue(topology, loc) -> UeLocation:
    if isinstance(loc, tuple):
        ue = UeLocation(*loc)
        ue.check(topology)
        return ue
    return representative_location(topology, loc)


def _sweep_linear(cfg: RunConfig, values):
    return np.array([db_to_linear(v) for v in values]) if cfg.sweep.scale == "dB" else np.asarray(values)


def _sim_fields(est, cfg):
    return dict(sim_mean=est.mean, sim_ci95=est.half_width_95, n_trials=est.n_trials,
                seed=cfg.sim["seed"])


def coverage_vs_beta(cfg: RunConfig, analytic=True, simulate=False, label="coverage_vs_beta"):
    values = cfg.sweep.values()
    betas = _sweep_linear(cfg, values)
    eps = cfg.analysis["epsilon"]
    rows = []
    for topo in cfg.topologies:
        p = cfg.params.replace(topology=topo)
        for loc in cfg.locations:
            ue = _ue(topo, loc)
            curve = LocationAnalysis(topo, ue, p, eps).coverage_curve(betas) if analytic else None
            ests = None
            if simulate:
                s = simulate_sinr(topo, ue, p, cfg.sim["n_trials"], cfg.sim["seed"],
                                  cfg.sim["pe_model"], workers=cfg.sim["workers"])
                ests = coverage_from_samples(s, betas)
            for k, v in enumerate(values):
                row = ResultRow(label, topo, ue.x0, ue.y0, cfg.sweep.name, float(v),
                                trunc_radius_m=truncation_radius(p, eps, topo))
                if curve is not None:
                    row.analytic = float(curve[k])
                if ests is not None:
                    for name, val in _sim_fields(ests[k], cfg).items():
                        setattr(row, name, val)
                rows.append(row)
    return rows


def association_vs_lambda_w(cfg: RunConfig, analytic=True, simulate=False):
    rows = []
    for topo in cfg.topologies:
        for loc in cfg.locations:
            ue = _ue(topo, loc)
            for v in cfg.sweep.values():
                p = cfg.params.replace(topology=topo, lambda_W=float(v))
                row = ResultRow("association_vs_lambda_w", topo, ue.x0, ue.y0, "lambda_W", float(v),
                                trunc_radius_m=p.R_A)
                base = None
                if analytic:
                    la = LocationAnalysis(topo, ue, p)
                    row.analytic = la.association.total
                    base = ResultRow("association_vs_lambda_w_independent", topo, ue.x0, ue.y0,
                                     "lambda_W", float(v), trunc_radius_m=p.R_A,
                                     analytic=LocationAnalysis(topo, ue, p, independent_walls=True)
                                     .association.total)
                if simulate:
                    est = estimate_association(topo, ue, p, cfg.sim["n_trials"], cfg.sim["seed"],
                                               cfg.sim["workers"])[None]
                    row.sim_mean = 1.0 - est.mean
                    row.sim_ci95, row.n_trials, row.seed = est.half_width_95, est.n_trials, cfg.sim["seed"]
                rows.append(row)
                if base is not None:
                    rows.append(base)
    return rows


def coverage_vs_density(cfg: RunConfig, analytic=True, simulate=False):
    beta = db_to_linear(cfg.beta_dB)
    eps = cfg.analysis["epsilon"]
    rows = []
    for topo in cfg.topologies:
        locs = [None] if topo == "ppp" else cfg.locations
        for loc in locs:
            ue = None if loc is None else _ue(topo, loc)
            for lam in cfg.sweep.values():
                lam = float(lam)
                if topo == "ppp":
                    p = cfg.params.replace(topology="ppp", d_AP=1.0 / math.sqrt(lam))
                    row = ResultRow("coverage_vs_density", topo, None, None, "lambda_A", lam,
                                    trunc_radius_m=ppp_radius(p, lam))
                    if simulate:
                        est = ppp_baseline_coverage(lam, beta, p, cfg.sim["n_trials"], cfg.sim["seed"],
                                                    cfg.sim["pe_model"], workers=cfg.sim["workers"])
                        for name, val in _sim_fields(est, cfg).items():
                            setattr(row, name, val)
                    rows.append(row)
                    continue
                p = cfg.params.replace(topology=topo, d_AP=d_ap_for_density(topo, lam))
                row = ResultRow("coverage_vs_density", topo, ue.x0, ue.y0, "lambda_A", lam,
                                trunc_radius_m=truncation_radius(p, eps, topo))
                if analytic:
                    row.analytic = float(LocationAnalysis(topo, ue, p, eps).coverage_curve([beta])[0])
                if simulate:
                    s = simulate_sinr(topo, ue, p, cfg.sim["n_trials"], cfg.sim["seed"],
                                      cfg.sim["pe_model"], workers=cfg.sim["workers"])
                    for name, val in _sim_fields(coverage_from_samples(s, beta), cfg).items():
                        setattr(row, name, val)
                rows.append(row)
    return rows


def training_vs_array(cfg: RunConfig, analytic=True, simulate=False):
    grid = [int(round(v)) for v in cfg.sweep.values()]
    bt = cfg.beamtrain
    stages = stages_vs_array(cfg.params, grid, bt["omega_mode"], bt["kappa"], bt["exact"])
    return [ResultRow("training_vs_array", cfg.params.topology, None, None, "N_A", float(n),
                      analytic=float(s)) for n, s in zip(grid, stages)]


def pe_distribution(cfg: RunConfig, analytic=True, simulate=False):
    p = cfg.params
    dist = PointingErrorDist(p.omega_T, p.derived.omega_A)
    hs = cfg.sweep.values()
    samples = None
    if simulate:
        g = CounterGenerator(cfg.sim["seed"], 0, "beam")
        model = cfg.sim["pe_model"] if cfg.sim["pe_model"] != "none" else "gaussian"
        samples = np.sort(sample_pointing_loss(g, model, p.omega_T, p.N_A, cfg.sim["n_trials"]))
    rows = []
    for h in hs:
        row = ResultRow("pe_distribution", p.topology, None, None, "h", float(h))
        if analytic:
            row.analytic = float(dist.cdf(h))
        if samples is not None:
            n = len(samples)
            m = np.searchsorted(samples, h, side="right") / n
            row.sim_mean, row.sim_ci95 = float(m), 1.96 * math.sqrt(m * (1 - m) / n)
            row.n_trials, row.seed = n, cfg.sim["seed"]
        rows.append(row)
    return rows


RUNNERS = {
    "coverage_vs_beta": coverage_vs_beta,
    "validate": lambda cfg, analytic=True, simulate=True: coverage_vs_beta(cfg, True, True, "validate"),
    "association_vs_lambda_w": association_vs_lambda_w,
    "coverage_vs_density": coverage_vs_density,
    "training_vs_array": training_vs_array,
    "pe_distribution": pe_distribution,
}


def run_experiment(cfg: RunConfig, analytic: bool = True, simulate: bool = False,
                   validate: bool = False) -> list[ResultRow]:
    rows = RUNNERS[cfg.experiment](cfg, analytic, simulate or validate)
    if validate or cfg.experiment == "validate":
        tol = cfg.validate["tolerance"]
        for r in rows:
            if r.analytic is not None and r.sim_mean is not None:
                r.passed = abs(r.analytic - r.sim_mean) <= tol
    return rows


# -- output ----------------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def render_csv(rows, cfg: RunConfig, with_pass: bool = False) -> str:
    buf = io.StringIO()
    buf.write(f"# thzcov {__version__}\n")
    if "ppp" in cfg.topologies:
        buf.write("# ppp access points are redrawn every trial\n")
    for k, v in cfg.resolved_items():
        buf.write(f"# {k} = {json.dumps(v)}\n")
    cols = COLUMNS + (("pass",) if with_pass else ())
    buf.write(",".join(cols) + "\n")
    for r in rows:
        d = asdict(r)
        vals = [_fmt(d[c]) for c in COLUMNS]
        if with_pass:
            vals.append(_fmt(d["passed"]))
        buf.write(",".join(vals) + "\n")
    return buf.getvalue()


def render_json(rows, cfg: RunConfig) -> str:
    def clean(v):
        return _fmt(v) if isinstance(v, float) and not math.isfinite(v) else v
    payload = {
        "version": __version__,
        "experiment": cfg.experiment,
        "config": dict(cfg.resolved_items()),
        "rows": [{k: clean(v) for k, v in asdict(r).items()} for r in rows],
    }
    return json.dumps(payload, indent=1, sort_keys=True, default=str)


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory and rename; no partial file on failure."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".thzcov-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
