"""Run configuration: flat dotted-key TOML with a strict schema.

Physical keys use the units people quote (dBm for powers, dB for the
training threshold) and are converted to SI/linear in :func:`build_params`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .params import DEFAULT_PHI_SCALE, ParameterError, SystemParams

EXPERIMENTS = ("coverage_vs_beta", "association_vs_lambda_w", "coverage_vs_density",
               "training_vs_array", "pe_distribution", "validate")
SCALES = ("linear", "log", "dB")


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message names the offending key."""


# key -> (type, default, unit, description)
SCHEMA = {
    "h_A": (float, 3.0, "m", "AP height"),
    "h_U": (float, 1.3, "m", "UE height"),
    "h_B": (float, 1.7, "m", "human body height"),
    "R_B": (float, 0.25, "m", "human body radius"),
    "lambda_B": (float, 0.1, "1/m^2", "human density"),
    "lambda_W": (float, 0.02, "1/m", "wall density per axis"),
    "d_AP": (float, 15.0, "m", "AP lattice spacing"),
    "R_A": (float, 15.0, "m", "association radius"),
    "N_A": (int, 16, "-", "AP array size per side"),
    "N_U": (int, 2, "-", "UE array size per side"),
    "f": (float, 300e9, "Hz", "carrier frequency"),
    "B": (float, 5e9, "Hz", "bandwidth (informational)"),
    "eps_f": (float, 0.00143, "1/m", "molecular absorption coefficient"),
    "P_t": (float, 5.0, "dBm", "transmit power"),
    "N_0": (float, -77.0, "dBm", "noise power"),
    "omega_T": (float, 0.0554, "rad", "beam-training offset half-width"),
    "N_RF": (int, 6, "-", "RF chains per AP"),
    "beta_ct": (float, 10.0, "dB", "beam-training SINR threshold"),
    "topology": (str, "square", "-", "default lattice: square|hexagonal|ppp"),
    "sidelobe.phi_scale": (float, DEFAULT_PHI_SCALE, "-", "mainlobe width as a multiple of 1.06/N"),
    "experiment": (str, "coverage_vs_beta", "-", "|".join(EXPERIMENTS)),
    "topologies": (list, ["square", "hexagonal"], "-", "topologies to evaluate"),
    "locations": (list, [1, 2, 3], "-", "representative ids 1-3 or [x0, y0] pairs"),
    "beta": (float, 20.0, "dB", "SINR threshold when beta is not swept"),
    "sweep.name": (str, "", "-", "swept quantity (defaults per experiment)"),
    "sweep.start": (float, math.nan, "sweep units", "first sweep value"),
    "sweep.stop": (float, math.nan, "sweep units", "last sweep value"),
    "sweep.n": (int, 0, "-", "number of sweep points"),
    "sweep.scale": (str, "", "-", "linear|log|dB"),
    "sim.enabled": (bool, False, "-", "run Monte Carlo alongside analysis in 'sweep'"),
    "sim.n_trials": (int, 100000, "-", "Monte Carlo trials per point"),
    "sim.seed": (int, 20240601, "-", "base seed (u64)"),
    "sim.pe_model": (str, "gaussian", "-", "gaussian|array_factor|none"),
    "sim.workers": (int, 1, "-", "worker processes (does not change results)"),
    "analysis.epsilon": (float, 0.0, "W", "truncation tail bound; 0 selects the relative default"),
    "validate.tolerance": (float, 0.03, "-", "max |analytic - simulated| for a pass"),
    "beamtrain.omega_mode": (str, "tied", "-", "tied|fixed omega_T across the N_A sweep"),
    "beamtrain.kappa": (float, 0.0, "-", "omega_T = kappa*1.06/N_A in tied mode; 0 = match the reference omega_T"),
    "beamtrain.exact": (bool, False, "-", "use the exact lattice sum for inter-AP interference"),
    "output.path": (str, "results.csv", "-", "CSV output path"),
    "output.format": (str, "csv", "-", "csv|csv+json"),
}

# experiment -> (sweep name, start, stop, n, scale)
DEFAULT_SWEEPS = {
    "coverage_vs_beta": ("beta", -10.0, 40.0, 11, "dB"),
    "validate": ("beta", -10.0, 40.0, 11, "dB"),
    "association_vs_lambda_w": ("lambda_W", 0.0, 0.1, 11, "linear"),
    "coverage_vs_density": ("lambda_A", 2e-3, 2e-2, 6, "log"),
    "training_vs_array": ("N_A", 4.0, 64.0, 31, "linear"),
    "pe_distribution": ("h", 0.2, 1.0, 41, "linear"),
}

# keys excluded from the provenance block because they cannot change results
NON_RESULT_KEYS = ("sim.workers", "output.path", "output.format")


@dataclass(frozen=True)
class Sweep:
    name: str
    start: float
    stop: float
    n: int
    scale: str

    def values(self):
        """Sweep points in sweep units (dB stays dB)."""
        import numpy as np
        if self.n == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.n)
        return np.linspace(self.start, self.stop, self.n)


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    experiment: str
    topologies: tuple
    locations: tuple
    beta_dB: float
    sweep: Sweep
    sim: dict
    output: dict
    analysis: dict
    beamtrain: dict
    validate: dict
    raw: dict = field(default_factory=dict)

    def resolved_items(self):
        """Every schema key with its effective value, for provenance headers."""
        return [(k, self.raw[k]) for k in sorted(self.raw) if k not in NON_RESULT_KEYS]


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(key: str, value, typ):
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if typ is list:
        if not isinstance(value, list):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        return value
    raise AssertionError(typ)


def build_params(values: dict) -> SystemParams:
    kw = {k: values[k] for k in SCHEMA if "." not in k and k in SystemParams.__dataclass_fields__
          and k not in ("P_t", "N_0", "beta_ct", "topology")}
    try:
        return SystemParams.from_db(P_t_dBm=values["P_t"], N_0_dBm=values["N_0"],
                                    beta_ct_dB=values["beta_ct"], topology=values["topology"],
                                    phi_scale=values["sidelobe.phi_scale"], **kw)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None


def _locations(raw) -> tuple:
    locs = []
    for item in raw:
        if isinstance(item, int) and not isinstance(item, bool) and item in (1, 2, 3):
            locs.append(item)
        elif (isinstance(item, list) and len(item) == 2
              and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item)):
            locs.append((float(item[0]), float(item[1])))
        else:
            raise ConfigError(f"locations: entries must be 1, 2, 3 or [x0, y0], got {item!r}")
    if not locs:
        raise ConfigError("locations: need at least one location")
    return tuple(locs)


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    flat = _flatten(data)
    if overrides:
        flat.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(flat) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    values = {}
    for key, (typ, default, _, _) in SCHEMA.items():
        values[key] = _coerce(key, flat[key], typ) if key in flat else default

    params = build_params(values)
    exp = values["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {exp!r}")
    topologies = tuple(values["topologies"])
    for t in topologies:
        if t not in ("square", "hexagonal", "ppp"):
            raise ConfigError(f"topologies: unknown topology {t!r}")
    if "ppp" in topologies and exp != "coverage_vs_density":
        raise ConfigError("topologies: 'ppp' is only supported by coverage_vs_density")

    name, start, stop, n, scale = DEFAULT_SWEEPS[exp]
    sweep = Sweep(values["sweep.name"] or name,
                  start if math.isnan(values["sweep.start"]) else values["sweep.start"],
                  stop if math.isnan(values["sweep.stop"]) else values["sweep.stop"],
                  values["sweep.n"] or n, values["sweep.scale"] or scale)
    if sweep.name != name:
        raise ConfigError(f"sweep.name: experiment {exp} sweeps {name!r}, got {sweep.name!r}")
    if sweep.scale not in SCALES:
        raise ConfigError(f"sweep.scale: must be one of {SCALES}")
    if sweep.n < 1:
        raise ConfigError("sweep.n: must be >= 1")
    if sweep.scale == "log" and (sweep.start <= 0 or sweep.stop <= 0):
        raise ConfigError("sweep.start/sweep.stop: log sweeps need positive bounds")
    if sweep.n > 1 and not sweep.stop > sweep.start:
        raise ConfigError("sweep.stop: must exceed sweep.start")

    values.update({"sweep.name": sweep.name, "sweep.start": sweep.start, "sweep.stop": sweep.stop,
                   "sweep.n": sweep.n, "sweep.scale": sweep.scale})

    sim = {"enabled": values["sim.enabled"], "n_trials": values["sim.n_trials"],
           "seed": values["sim.seed"], "pe_model": values["sim.pe_model"],
           "workers": values["sim.workers"]}
    if sim["pe_model"] not in ("gaussian", "array_factor", "none"):
        raise ConfigError("sim.pe_model: must be gaussian, array_factor or none")
    if not 0 <= sim["seed"] < 2 ** 64:
        raise ConfigError("sim.seed: must fit in an unsigned 64-bit integer")
    if sim["workers"] < 1:
        raise ConfigError("sim.workers: must be >= 1")
    if sim["n_trials"] < 1:
        raise ConfigError("sim.n_trials: must be >= 1")
    if exp == "validate" and sim["n_trials"] < 1000:
        raise ConfigError("sim.n_trials: validate needs at least 1000 trials")
    if values["output.format"] not in ("csv", "csv+json"):
        raise ConfigError("output.format: must be csv or csv+json")
    if values["beamtrain.omega_mode"] not in ("tied", "fixed"):
        raise ConfigError("beamtrain.omega_mode: must be tied or fixed")
    if values["analysis.epsilon"] < 0:
        raise ConfigError("analysis.epsilon: must be >= 0")
    if values["validate.tolerance"] <= 0:
        raise ConfigError("validate.tolerance: must be positive")

    return RunConfig(
        params=params, experiment=exp, topologies=topologies,
        locations=_locations(values["locations"]), beta_dB=values["beta"], sweep=sweep, sim=sim,
        output={"path": values["output.path"], "format": values["output.format"]},
        analysis={"epsilon": values["analysis.epsilon"] or None},
        beamtrain={"omega_mode": values["beamtrain.omega_mode"],
                   "kappa": values["beamtrain.kappa"] or None,
                   "exact": values["beamtrain.exact"]},
        validate={"tolerance": values["validate.tolerance"]},
        raw=values,
    )


def schema_help() -> str:
    lines = ["config keys (TOML, dotted keys allowed; defaults are the reference scenario):"]
    for key, (typ, default, unit, desc) in SCHEMA.items():
        lines.append(f"  {key:22s} {typ.__name__:5s} default={default!r:<24} [{unit}] {desc}")
    return "\n".join(lines)
