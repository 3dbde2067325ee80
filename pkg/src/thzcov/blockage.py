"""Human and wall blockage statistics.

Walls are two independent Manhattan Poisson line processes (lines at
x = const and y = const, each a 1D PPP of rate lambda_W). A set of links is
simultaneously wall-free iff no wall cuts the union of their projections on
either axis. Every projection starts at the UE, so the union on an axis is
just the longest extent on the positive side plus the longest on the negative side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import LinkGeometry


@dataclass(frozen=True)
class BlockageProbs:
    p_H: float
    p_W: float

    @property
    def p(self) -> float:
        return self.p_H * self.p_W

    @property
    def chi(self) -> float:
        return -math.log(self.p)


@dataclass(frozen=True)
class ProjectionExtents:
    x_pos: float
    x_neg: float
    y_pos: float
    y_neg: float

    @property
    def x_union(self) -> float:
        return self.x_pos + self.x_neg

    @property
    def y_union(self) -> float:
        return self.y_pos + self.y_neg

    @property
    def total(self) -> float:
        return self.x_union + self.y_union


def human_unblocked(d, alpha: float):
    out = np.exp(-alpha * np.asarray(d, dtype=float))
    return out if out.ndim else float(out)


def wall_unblocked(d_x, d_y, lambda_W: float):
    out = np.exp(-lambda_W * (np.asarray(d_x, dtype=float) + np.asarray(d_y, dtype=float)))
    return out if out.ndim else float(out)


def blockage_probs(link: LinkGeometry, alpha: float, lambda_W: float) -> BlockageProbs:
    return BlockageProbs(human_unblocked(link.d, alpha), wall_unblocked(link.d_x, link.d_y, lambda_W))


def union_extents(links: Sequence[LinkGeometry]) -> ProjectionExtents:
    if not links:
        raise ValueError("union_extents needs at least one link")
    sx = [l.dx_signed for l in links]
    sy = [l.dy_signed for l in links]
    return ProjectionExtents(
        x_pos=max(max(v, 0.0) for v in sx),
        x_neg=max(max(-v, 0.0) for v in sx),
        y_pos=max(max(v, 0.0) for v in sy),
        y_neg=max(max(-v, 0.0) for v in sy),
    )


def joint_wall_unblocked(links: Sequence[LinkGeometry], lambda_W: float) -> float:
    return math.exp(-lambda_W * union_extents(links).total)


def wall_covariance(link1: LinkGeometry, link2: LinkGeometry, lambda_W: float) -> float:
    """Covariance of the wall-blockage indicators of two links (same for the unblocked ones)."""
    joint = joint_wall_unblocked([link1, link2], lambda_W)
    return joint - joint_wall_unblocked([link1], lambda_W) * joint_wall_unblocked([link2], lambda_W)


def conditional_wall_unblocked(target: LinkGeometry, given: LinkGeometry, lambda_W: float) -> float:
    return math.exp(-lambda_W * (union_extents([target, given]).total - union_extents([given]).total))


def conditional_wall_covariance(link_a: LinkGeometry, link_b: LinkGeometry,
                                given: LinkGeometry, lambda_W: float) -> float:
    """Cov of the wall-unblocked indicators of a and b given ``given`` is wall-unblocked."""
    pg = joint_wall_unblocked([given], lambda_W)
    pab = joint_wall_unblocked([link_a, link_b, given], lambda_W) / pg
    pa = joint_wall_unblocked([link_a, given], lambda_W) / pg
    pb = joint_wall_unblocked([link_b, given], lambda_W) / pg
    return pab - pa * pb


# -- vectorised forms used by the analysis engine -----------------------------

def side_extents(sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """(n, 4) array of per-link extents on the +x, -x, +y, -y half-axes."""
    sx = np.asarray(sx, dtype=float)
    sy = np.asarray(sy, dtype=float)
    return np.stack([np.maximum(sx, 0), np.maximum(-sx, 0),
                     np.maximum(sy, 0), np.maximum(-sy, 0)], axis=-1)


def excess_over(ext: np.ndarray, given: np.ndarray) -> np.ndarray:
    """Per-side length each link adds on top of the ``given`` link's extents."""
    return np.maximum(ext - given, 0.0)
