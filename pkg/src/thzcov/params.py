"""System parameters for the grid-deployed indoor THz network and derived constants.

All quantities are stored in SI/linear units. Powers and thresholds that are
usually quoted in dBm/dB are converted once, at construction time, by the
``from_db`` constructor or the config parser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import cached_property

from .antenna import sidelobe_gain

SPEED_OF_LIGHT = 3e8  # m/s, fixed value used by the path-gain model
GAUSSIAN_BEAM_SCALE = 1.06  # omega_A = 1.06 / N
# mainlobe width = phi_scale * 1.06 / N; 0.886*2/1.06 puts it at the half-power beamwidth
DEFAULT_PHI_SCALE = 2 * 0.886 / GAUSSIAN_BEAM_SCALE

TOPOLOGIES = ("square", "hexagonal", "ppp")


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w) + 30.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


class ParameterError(ValueError):
    """Raised when a parameter set violates a physical or modelling invariant."""


@dataclass(frozen=True)
class DerivedConstants:
    delta_h: float
    alpha: float
    xi: float
    omega_A: float
    omega_1: float
    G_A_max: float
    G_U_max: float
    G_max: float
    G_S_ap: float
    G_S_ue: float
    G_S: float


@dataclass(frozen=True)
class SystemParams:
    """One run's worth of physical parameters (defaults are the reference indoor scenario).

    ``R_A`` is the association (coverage) radius. ``B`` is carried for
    completeness only; noise power is given directly by ``N_0``.
    """

    h_A: float = 3.0
    h_U: float = 1.3
    h_B: float = 1.7
    R_B: float = 0.25
    lambda_B: float = 0.1
    lambda_W: float = 0.02
    d_AP: float = 15.0
    R_A: float = 15.0
    N_A: int = 16
    N_U: int = 2
    f: float = 300e9
    B: float = 5e9
    eps_f: float = 0.00143
    P_t: float = field(default_factory=lambda: dbm_to_watts(5.0))
    N_0: float = field(default_factory=lambda: dbm_to_watts(-77.0))
    omega_T: float = 0.0554
    N_RF: int = 6
    beta_ct: float = field(default_factory=lambda: db_to_linear(10.0))
    topology: str = "square"
    phi_scale: float = DEFAULT_PHI_SCALE

    def __post_init__(self):
        self.validate()
        self.derived  # fail at construction if the sidelobe model is degenerate

    @classmethod
    def from_db(cls, P_t_dBm: float = 5.0, N_0_dBm: float = -77.0,
                beta_ct_dB: float = 10.0, **kwargs) -> "SystemParams":
        return cls(P_t=dbm_to_watts(P_t_dBm), N_0=dbm_to_watts(N_0_dBm),
                   beta_ct=db_to_linear(beta_ct_dB), **kwargs)

    def validate(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise ParameterError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if not (self.h_U < self.h_B < self.h_A):
            raise ParameterError(
                f"heights must satisfy h_U < h_B < h_A (got h_U={self.h_U}, h_B={self.h_B}, h_A={self.h_A})")
        for name in ("h_U", "R_B", "d_AP", "R_A", "f", "B", "P_t", "N_0", "beta_ct", "phi_scale"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive, got {getattr(self, name)}")
        # densities and absorption may be zero: that switches the mechanism off
        for name in ("lambda_B", "lambda_W", "eps_f"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("N_A", "N_U", "N_RF"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v}")
        if self.N_A < self.N_U:
            raise ParameterError(f"N_A >= N_U required (got N_A={self.N_A}, N_U={self.N_U})")
        if not (0 < self.omega_T < math.pi / 2):
            raise ParameterError(f"omega_T must lie in (0, pi/2), got {self.omega_T}")

    @cached_property
    def derived(self) -> DerivedConstants:
        return derive_constants(self)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def mainlobe_width(N: int, phi_scale: float = DEFAULT_PHI_SCALE) -> float:
    return phi_scale * GAUSSIAN_BEAM_SCALE / N


def derive_constants(p: SystemParams) -> DerivedConstants:
    p.validate()
    delta_h = p.h_A - p.h_U
    alpha = 2.0 * p.lambda_B * p.R_B * (p.h_B - p.h_U) / delta_h
    xi = SPEED_OF_LIGHT ** 2 / (4.0 * math.pi * p.f) ** 2
    omega_A = GAUSSIAN_BEAM_SCALE / p.N_A
    omega_1 = math.exp(-p.omega_T ** 2 / omega_A ** 2)
    G_A_max = math.pi * p.N_A ** 2
    G_U_max = math.pi * p.N_U ** 2

    phi_a = mainlobe_width(p.N_A, p.phi_scale)
    phi_u = mainlobe_width(p.N_U, p.phi_scale)
    G_S_ap = sidelobe_gain(p.N_A, phi_a, phi_a)
    G_S_ue = sidelobe_gain(p.N_U, phi_u, phi_u)
    if G_S_ap <= 0 or G_S_ue <= 0:
        raise ParameterError(
            f"phi_scale={p.phi_scale} makes the mainlobe carry more than the total radiated "
            f"power (G_S_ap={G_S_ap:.4g}, G_S_ue={G_S_ue:.4g}); use a narrower mainlobe")
    return DerivedConstants(
        delta_h=delta_h, alpha=alpha, xi=xi, omega_A=omega_A, omega_1=omega_1,
        G_A_max=G_A_max, G_U_max=G_U_max, G_max=G_A_max * G_U_max,
        G_S_ap=G_S_ap, G_S_ue=G_S_ue, G_S=G_S_ap * G_S_ue,
    )
