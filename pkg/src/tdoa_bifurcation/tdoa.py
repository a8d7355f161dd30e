"""Forward TDOA map and the feasibility structure of measurement space.

Measurements ``tau = (tau1, tau2)`` are range differences to the
reference receiver ``m0`` (unit propagation speed).  Feasible pairs lie
in a hexagon bounded by the triangle inequalities; the ellipse
``a(tau) = 0`` inscribed in it separates pairs with one preimage from
pairs with two.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Tuple

import numpy as np

from .geometry import AffineLine, ReceiverConfig
from .localize import localize

#: default normalized band for "on the ellipse" / "on a facet"
ON_BAND = 1e-9


class TdoaPair(NamedTuple):
    tau1: float
    tau2: float


class TauRegion(enum.Enum):
    OutsideImage = "OutsideImage"
    InteriorUnique = "InteriorUnique"
    InteriorAmbiguous = "InteriorAmbiguous"
    OnEllipse = "OnEllipse"
    OnPolytopeBoundary = "OnPolytopeBoundary"
    ExcludedTangency = "ExcludedTangency"


def tau2_forward(config: ReceiverConfig, x) -> TdoaPair:
    t = tau2_forward_array(config, np.asarray(x, dtype=float)[None, :])[0]
    return TdoaPair(float(t[0]), float(t[1]))


def tau2_forward_array(config: ReceiverConfig, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    m = config.points
    d0 = np.hypot(pts[..., 0] - m[0, 0], pts[..., 1] - m[0, 1])
    d1 = np.hypot(pts[..., 0] - m[1, 0], pts[..., 1] - m[1, 1])
    d2 = np.hypot(pts[..., 0] - m[2, 0], pts[..., 1] - m[2, 1])
    return np.stack([d1 - d0, d2 - d0], axis=-1)


def ellipse_value(config: ReceiverConfig, tau):
    """``|tau2*d10 - tau1*d20|**2 - W**2``.

    Exact when both components are ``int``/``Fraction``; otherwise float
    (arrays broadcast over the last axis).
    """
    if all(isinstance(t, (int, Fraction)) for t in tau):
        t1, t2 = Fraction(tau[0]), Fraction(tau[1])
        v = config.d10.scale(t2) - config.d20.scale(t1)
        return v.norm2() - config.W**2
    tau = np.asarray(tau, dtype=float)
    t1, t2 = tau[..., 0], tau[..., 1]
    d10 = [float(c) for c in config.d10]
    d20 = [float(c) for c in config.d20]
    vx = t2 * d10[0] - t1 * d20[0]
    vy = t2 * d10[1] - t1 * d20[1]
    out = vx * vx + vy * vy - float(config.W) ** 2
    return float(out) if np.ndim(out) == 0 else out


# facets are n . tau <= h, listed as (id, n, which side length)
FACET_IDS = (
    "tau1=+d10",
    "tau1=-d10",
    "tau2=+d20",
    "tau2=-d20",
    "tau2-tau1=+d21",
    "tau2-tau1=-d21",
)
_FACET_NORMALS = ((1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1))
_FACET_SIDE = (0, 0, 1, 1, 2, 2)


def _facets(config: ReceiverConfig):
    sides = config.side_lengths
    return [(fid, n, sides[s]) for fid, n, s in zip(FACET_IDS, _FACET_NORMALS, _FACET_SIDE)]


@dataclass(frozen=True)
class Polytope:
    facets: Tuple[Tuple[str, AffineLine], ...]
    vertices: Tuple[TdoaPair, ...]


class Membership(NamedTuple):
    kind: str  # "interior" | "boundary" | "outside"
    facets: Tuple[str, ...] = ()


def facet_slacks(config: ReceiverConfig, tau) -> np.ndarray:
    """Distances ``(h - n.tau)/|n|`` to the six facets; negative means violated."""
    t = np.asarray(tau, dtype=float)
    return np.array([(h - (n[0] * t[0] + n[1] * t[1])) / math.hypot(*n) for _, n, h in _facets(config)])


def _boundary_bands(config: ReceiverConfig, tol: float) -> np.ndarray:
    return np.array([tol * h for _, _, h in _facets(config)])


def polytope_membership(config: ReceiverConfig, tau, tol: float = ON_BAND) -> Membership:
    slack = facet_slacks(config, tau)
    band = _boundary_bands(config, tol)
    if np.any(slack < -band):
        return Membership("outside", tuple(f for f, s, b in zip(FACET_IDS, slack, band) if s < -b))
    on = tuple(f for f, s, b in zip(FACET_IDS, slack, band) if abs(s) <= b)
    if on:
        return Membership("boundary", on)
    return Membership("interior")


def polytope(config: ReceiverConfig) -> Polytope:
    facets = tuple((fid, AffineLine(n[0], n[1], -h)) for fid, n, h in _facets(config))
    return Polytope(facets=facets, vertices=tuple(polytope_vertices(config)))


def polytope_vertices(config: ReceiverConfig, tol: float = ON_BAND) -> List[TdoaPair]:
    """Feasible pairwise facet intersections, in counter-clockwise order."""
    lines = [AffineLine(n[0], n[1], -h) for _, n, h in _facets(config)]
    band = tol * config.length_scale
    found: List[TdoaPair] = []
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            p = lines[i].intersect(lines[j])
            if p is None:
                continue
            t = (float(p[0]), float(p[1]))
            if np.all(facet_slacks(config, t) >= -band):
                if all(math.hypot(t[0] - q[0], t[1] - q[1]) > band for q in found):
                    found.append(TdoaPair(*t))
    found.sort(key=lambda q: math.atan2(q[1], q[0]))
    return found


def tangency_points(config: ReceiverConfig) -> List[TdoaPair]:
    """Touching point of the ellipse with each facet, in ``FACET_IDS`` order.

    For the conic ``tau^T G tau = W^2`` and the line ``n.tau = h`` the
    contact point is ``h * G^-1 n / (n^T G^-1 n)``.
    """
    g11 = float(config.d10_sq)  # entries of W^2 * G^-1
    g22 = float(config.d20_sq)
    g12 = float(config.d10.dot(config.d20))
    out = []
    for _, n, h in _facets(config):
        v = (g11 * n[0] + g12 * n[1], g12 * n[0] + g22 * n[1])
        s = n[0] * v[0] + n[1] * v[1]
        out.append(TdoaPair(h * v[0] / s, h * v[1] / s))
    return out


@dataclass(frozen=True)
class TauClassification:
    region: TauRegion
    expected_count: int
    a_value: float
    facet_slacks: Tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "region": self.region.value,
            "expected_count": self.expected_count,
            "a_value": self.a_value,
            "facet_slacks": list(self.facet_slacks),
        }


def classify_tau(config: ReceiverConfig, tau, ellipse_tol: float = None, boundary_tol: float = None) -> TauClassification:
    """Region of ``tau`` and the number of sources it should have.

    Points on the ellipse or on a facet are settled by whether the
    inverse solve actually finds a consistent source.
    """
    tols = config.tolerances
    ellipse_tol = ellipse_tol if ellipse_tol is not None else tols.get("ellipse", ON_BAND)
    boundary_tol = boundary_tol if boundary_tol is not None else tols.get("boundary", ON_BAND)

    t = (float(tau[0]), float(tau[1]))
    a = ellipse_value(config, tau)
    a_f = float(a)
    slack = facet_slacks(config, t)
    band = _boundary_bands(config, boundary_tol)
    on_ellipse = abs(a_f) <= ellipse_tol * float(config.W) ** 2
    on_facet = bool(np.any(np.abs(slack) <= band))

    def result(region, count):
        return TauClassification(region, count, a_f, tuple(float(s) for s in slack))

    if np.any(slack < -band):
        return result(TauRegion.OutsideImage, 0)
    if on_facet and on_ellipse:
        return result(TauRegion.ExcludedTangency, 0)
    if on_facet:
        return result(TauRegion.OnPolytopeBoundary, 1 if len(localize(config, t)) else 0)
    if on_ellipse:
        return result(TauRegion.OnEllipse, 1 if len(localize(config, t)) else 0)
    if a_f < 0:
        return result(TauRegion.InteriorUnique, 1)
    return result(TauRegion.InteriorAmbiguous, 2)
