"""Lattice geometry: AP coordinates, UE-AP link projections and AP enumeration.

Positions use the skewed lattice basis (1, 0) and (c1, c2) scaled by d_AP,
so one set of formulas serves both the square and hexagonal layouts. UE
coordinates (x0, y0) are fractions of d_AP in the same basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# relative tolerance (in units of d_AP) under which two link lengths count as a tie
TIE_TOL = 1e-9


class GridConstants(NamedTuple):
    c1: float
    c2: float


GRID_CONSTANTS = {
    "square": GridConstants(0.0, 1.0),
    "hexagonal": GridConstants(0.5, math.sqrt(3.0) / 2.0),
}


def grid_constants(topology: str) -> GridConstants:
    try:
        return GRID_CONSTANTS[topology]
    except KeyError:
        raise ValueError(f"no lattice for topology {topology!r}") from None


class ApIndex(NamedTuple):
    i: int
    j: int


@dataclass(frozen=True)
class UeLocation:
    x0: float
    y0: float

    def check(self, topology: str, tol: float = 1e-12) -> None:
        x0, y0 = self.x0, self.y0
        if not (-tol <= y0 <= x0 + tol and x0 <= 0.5 + tol):
            raise ValueError(f"UE ({x0}, {y0}) outside 0 <= y0 <= x0 <= 1/2")
        if topology == "hexagonal" and x0 + y0 / 2 > 0.5 + tol:
            raise ValueError(f"UE ({x0}, {y0}) violates x0 + y0/2 <= 1/2 for the hexagonal grid")


@dataclass(frozen=True)
class LinkGeometry:
    """Horizontal geometry of one UE-AP link (lengths in metres).

    ``sgn_x``/``sgn_y`` are the signs of the UE-minus-AP offsets, so two
    links share wall exposure on an axis when their signs agree there.
    """

    d: float
    d_x: float
    d_y: float
    sgn_x: int
    sgn_y: int

    @property
    def dx_signed(self) -> float:
        return self.sgn_x * self.d_x

    @property
    def dy_signed(self) -> float:
        return self.sgn_y * self.d_y


def ap_position(topology: str, idx, d_AP: float) -> tuple[float, float]:
    c1, c2 = grid_constants(topology)
    i, j = idx
    return ((i + c1 * j) * d_AP, c2 * j * d_AP)


def ue_position(topology: str, ue: UeLocation, d_AP: float) -> tuple[float, float]:
    c1, c2 = grid_constants(topology)
    return ((ue.x0 + c1 * ue.y0) * d_AP, c2 * ue.y0 * d_AP)


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def link_geometry(topology: str, ue: UeLocation, idx, d_AP: float) -> LinkGeometry:
    c1, c2 = grid_constants(topology)
    i, j = idx
    vx = ue.x0 - i + c1 * (ue.y0 - j)
    vy = ue.y0 - j
    return LinkGeometry(
        d=d_AP * math.sqrt(vx * vx + c2 * c2 * vy * vy),
        d_x=d_AP * abs(vx),
        d_y=c2 * d_AP * abs(vy),
        sgn_x=_sign(vx),
        sgn_y=_sign(vy),
    )


@dataclass(frozen=True)
class LinkArrays:
    """Vectorised links to a set of APs, in association order.

    Order is by distance, with equidistant APs grouped (``tie``) and ordered
    by (i, j). ``sx``/``sy`` are signed UE-minus-AP offsets in metres.
    """

    i: np.ndarray
    j: np.ndarray
    d: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    tie: np.ndarray

    def __len__(self) -> int:
        return len(self.d)

    def index(self, k: int) -> ApIndex:
        return ApIndex(int(self.i[k]), int(self.j[k]))

    def link(self, k: int) -> LinkGeometry:
        sx, sy = float(self.sx[k]), float(self.sy[k])
        return LinkGeometry(float(self.d[k]), abs(sx), abs(sy), _sign(sx), _sign(sy))

    def position_of(self, idx) -> int:
        hits = np.flatnonzero((self.i == idx[0]) & (self.j == idx[1]))
        if len(hits) == 0:
            raise KeyError(f"AP {tuple(idx)} not in this link set")
        return int(hits[0])

    def subset(self, mask) -> "LinkArrays":
        return LinkArrays(self.i[mask], self.j[mask], self.d[mask],
                          self.sx[mask], self.sy[mask], self.tie[mask])


def _tie_groups(d_sorted: np.ndarray, tol: float) -> np.ndarray:
    if len(d_sorted) == 0:
        return np.zeros(0, dtype=np.int64)
    jumps = np.diff(d_sorted) > tol
    return np.concatenate(([0], np.cumsum(jumps))).astype(np.int64)


def lattice_links(topology: str, ue: UeLocation, radius: float, d_AP: float) -> LinkArrays:
    """All lattice APs within horizontal distance ``radius`` of the UE."""
    c1, c2 = grid_constants(topology)
    # bounding box of indices: |j| from the y extent, then |i| from the x extent
    jmax = int(math.ceil(radius / (c2 * d_AP))) + 1
    imax = int(math.ceil(radius / d_AP + c1 * (jmax + 1))) + 1
    ii, jj = np.meshgrid(np.arange(-imax, imax + 1), np.arange(-jmax, jmax + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    vx = ue.x0 - ii + c1 * (ue.y0 - jj)
    vy = ue.y0 - jj
    d = d_AP * np.sqrt(vx * vx + c2 * c2 * vy * vy)
    keep = d <= radius * (1 + 1e-12)
    ii, jj, d, vx, vy = ii[keep], jj[keep], d[keep], vx[keep], vy[keep]

    order = np.argsort(d, kind="stable")
    tie = np.empty_like(order)
    tie[order] = _tie_groups(d[order], TIE_TOL * d_AP)
    order = np.lexsort((jj, ii, tie))
    return LinkArrays(ii[order], jj[order], d[order], d_AP * vx[order],
                      c2 * d_AP * vy[order], tie[order])


def aps_within(topology: str, ue: UeLocation, radius: float, d_AP: float):
    if radius <= 0:
        raise ValueError("radius must be positive")
    links = lattice_links(topology, ue, radius, d_AP)
    return [(links.index(k), links.link(k)) for k in range(len(links))]


def closer_set(topology: str, ue: UeLocation, idx, d_AP: float, radius: float):
    """APs that win association over ``idx`` when unblocked.

    These are the strictly closer APs plus equidistant ones that precede
    ``idx`` in (i, j) order, so that association events stay disjoint.
    """
    links = lattice_links(topology, ue, radius, d_AP)
    k = links.position_of(idx)
    return [links.index(m) for m in range(k)]


REPRESENTATIVE_LOCATIONS = {
    "square": {1: (0.0, 0.0), 2: (0.25, 0.25), 3: (0.5, 0.5)},
    "hexagonal": {1: (0.0, 0.0), 2: (1 / 6, 1 / 6), 3: (1 / 3, 1 / 3)},
}


def representative_location(topology: str, which: int) -> UeLocation:
    """Location 1 under AP(0,0), 3 farthest from it, 2 halfway between."""
    try:
        return UeLocation(*REPRESENTATIVE_LOCATIONS[topology][which])
    except KeyError:
        raise ValueError(f"no representative location {which!r} for {topology!r}") from None


def region_upper(topology: str, x):
    c1, _ = grid_constants(topology)
    return np.minimum(x, 1.0 - 4.0 * c1 * np.asarray(x))


def region_area(topology: str) -> float:
    c1, _ = grid_constants(topology)
    if c1 == 0:
        return 1.0 / 8.0
    # min(x, 1 - 4 c1 x) switches at x = 1 / (1 + 4 c1)
    xs = 1.0 / (1.0 + 4.0 * c1)
    return xs * xs / 2.0 + (0.5 - xs) - 2.0 * c1 * (0.25 - xs * xs)


def fundamental_region_quadrature(topology: str, n_points: int):
    """Midpoint rule over {0 <= x <= 1/2, 0 <= y <= min(x, 1 - 4 c1 x)}.

    ``n_points`` is the size of the full grid over [0, 1/2]^2 (rounded to a
    square); cells whose midpoint falls in the region are kept and weights
    are rescaled to the exact region area.
    """
    if n_points < 4:
        raise ValueError("n_points must be >= 4")
    m = max(2, int(round(math.sqrt(n_points))))
    h = 0.5 / m
    mids = (np.arange(m) + 0.5) * h
    X, Y = np.meshgrid(mids, mids, indexing="ij")
    inside = Y <= region_upper(topology, X) + 1e-15
    xs, ys = X[inside], Y[inside]
    w = np.full(len(xs), region_area(topology) / len(xs))
    return [(UeLocation(float(x), float(y)), float(wk)) for x, y, wk in zip(xs, ys, w)]
