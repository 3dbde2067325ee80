"""Planar-array gains and the pointing-error loss distribution.

The AP beam after training is off by independent uniform angles in
(-omega_T, omega_T) on each axis. Under a Gaussian mainlobe
exp(-theta^2/omega_A^2) the resulting loss H_pe has a closed-form piecewise
law on [omega_1^2, 1], implemented by :class:`PointingErrorDist`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class BeamOffsets:
    theta_H: float
    theta_V: float

    @property
    def theta(self) -> float:
        return math.hypot(self.theta_V, self.theta_H)

    @property
    def phi(self) -> float:
        return math.atan2(self.theta_V, self.theta_H)


@dataclass(frozen=True)
class SidelobeParams:
    phi_V: float
    phi_H: float
    G_S_ap: float
    G_S_ue: float

    @property
    def G_S(self) -> float:
        return self.G_S_ap * self.G_S_ue


def _array_factor_1d(x, N):
    """sin(N*pi*x/2) / (N*sin(pi*x/2)), equal to 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * np.pi * x
    small = np.abs(x) < _SERIES_CUTOFF
    denom = np.where(small, 1.0, N * np.sin(half))
    exact = np.sin(N * half) / denom
    series = 1.0 - (N * N - 1) * half ** 2 / 6.0
    return np.where(small, series, exact)


def array_factor_loss(theta_V, theta_H, N: int):
    """Normalised power pattern of an N x N half-wavelength planar array.

    The off-boresight angle is theta = sqrt(theta_V^2 + theta_H^2) and the
    direction cosines are sin(theta)*theta_V/theta and sin(theta)*theta_H/theta.
    Works elementwise on arrays.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    tv = np.asarray(theta_V, dtype=float)
    th = np.asarray(theta_H, dtype=float)
    theta = np.hypot(tv, th)
    scale = np.where(theta > 0, np.sin(theta) / np.where(theta > 0, theta, 1.0), 1.0)
    u = scale * tv
    v = scale * th
    loss = (_array_factor_1d(u, N) * _array_factor_1d(v, N)) ** 2
    return loss if loss.ndim else float(loss)


def gaussian_loss(theta, omega_A: float):
    theta = np.asarray(theta, dtype=float)
    out = np.exp(-theta ** 2 / omega_A ** 2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PointingErrorDist:
    """Law of the pointing-error loss for uniform per-axis offsets and a Gaussian beam.

    Below omega_1 the density follows the part of the disc
    theta_H^2 + theta_V^2 <= -omega_A^2 ln h that is clipped by the
    square of side omega_T, hence the arcsin terms.
    """

    omega_T: float
    omega_A: float

    @classmethod
    def for_array(cls, omega_T: float, N_A: int) -> "PointingErrorDist":
        return cls(omega_T, 1.06 / N_A)

    @property
    def omega_1(self) -> float:
        return math.exp(-self.omega_T ** 2 / self.omega_A ** 2)

    @property
    def support(self) -> tuple[float, float]:
        return self.omega_1 ** 2, 1.0

    def _branches(self, h):
        h = np.asarray(h, dtype=float)
        w1 = self.omega_1
        inner = (h >= w1) & (h <= 1.0)
        outer = (h >= w1 * w1) & (h < w1)
        return h, inner, outer

    def _rho(self, h, outer):
        # evaluate only where the outer branch applies; elsewhere feed a safe dummy
        hs = np.where(outer, h, self.omega_1 ** 1.5)
        s2 = -self.omega_A ** 2 * np.log(hs)  # squared angular offset for this loss
        rho1 = np.arcsin(np.clip(self.omega_T / np.sqrt(s2), -1.0, 1.0))
        rho2 = np.sqrt(np.maximum(s2 - self.omega_T ** 2, 0.0)) / self.omega_T
        return hs, rho1, rho2

    def pdf(self, h):
        h, inner, outer = self._branches(h)
        k = self.omega_A ** 2 / self.omega_T ** 2
        hs, rho1, _ = self._rho(h, outer)
        hi = np.where(inner, h, 1.0)
        out = np.where(inner, math.pi * k / (4.0 * hi), 0.0)
        out = np.where(outer, k / hs * (rho1 - math.pi / 4.0), out)
        return out if out.ndim else float(out)

    def cdf(self, h):
        h, inner, outer = self._branches(h)
        k = self.omega_A ** 2 / self.omega_T ** 2
        hs, rho1, rho2 = self._rho(h, outer)
        hi = np.where(inner, h, 1.0)
        out = np.where(h > 1.0, 1.0, 0.0)
        out = np.where(inner, 1.0 + math.pi * k * np.log(hi) / 4.0, out)
        out = np.where(outer, 1.0 + k * np.log(hs) * (rho1 - math.pi / 4.0) - rho2, out)
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def pdf_derivative(self, h):
        """d/dh of :meth:`pdf`. At h = omega_1 the inner (right-limit) branch is used."""
        h, inner, outer = self._branches(h)
        k = self.omega_A ** 2 / self.omega_T ** 2
        hs, rho1, rho2 = self._rho(h, outer)
        hi = np.where(inner, h, 1.0)
        out = np.where(inner, -math.pi * k / (4.0 * hi ** 2), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = -k / (2.0 * hs ** 2 * rho2 * np.log(hs))
        outer_val = -k / hs ** 2 * (rho1 - math.pi / 4.0) + tail
        out = np.where(outer, outer_val, out)
        return out if out.ndim else float(out)


def pointing_loss_from_offsets(theta_V, theta_H, model: str, N: int):
    if model == "gaussian":
        return gaussian_loss(np.hypot(theta_V, theta_H), 1.06 / N)
    if model == "array_factor":
        return array_factor_loss(theta_V, theta_H, N)
    raise ValueError(f"unknown pointing-error model {model!r}")


def sample_pointing_loss(rng: np.random.Generator, model: str, omega_T: float, N: int,
                         size=None):
    theta_H = rng.uniform(-omega_T, omega_T, size)
    theta_V = rng.uniform(-omega_T, omega_T, size)
    return pointing_loss_from_offsets(theta_V, theta_H, model, N)


def sidelobe_gain(N: int, phi_V: float, phi_H: float) -> float:
    """Cone-model sidelobe gain for a pyramidal mainlobe of widths phi_V x phi_H.

    Power conservation over the sphere: the mainlobe at gain pi*N^2 occupies
    solid angle 4*arcsin(tan(phi_V/2) tan(phi_H/2)); the rest is spread evenly.
    """
    if not (0 < phi_V < math.pi and 0 < phi_H < math.pi):
        raise ValueError("mainlobe widths must lie in (0, pi)")
    arg = math.tan(phi_V / 2) * math.tan(phi_H / 2)
    if not -1.0 <= arg <= 1.0:
        raise ValueError(f"degenerate mainlobe: tan(phi_V/2)*tan(phi_H/2) = {arg:.4g} outside [-1, 1]")
    a = math.asin(arg)
    return (math.pi - N * N * math.pi * a) / (math.pi - a)
