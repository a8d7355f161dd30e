"""Brute-force cross-checks for the closed-form routines.

None of these share code paths with what they check: the Newton oracle
never forms the range quadratic, the sign map compares the quintic with
the ellipse test in measurement space, and the numeric quintic is built
from float ranges instead of the exact expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .bifurcation import ON_CURVE_BAND, build_quintic, curve_band, quintic_numeric
from .geometry import ReceiverConfig, Vec2
from .localize import FAR_RANGE
from .tdoa import ON_BAND, ellipse_value, tau2_forward_array

CLUSTER_RADIUS = 1e-6
CONVERGENCE_TOL = 1e-10


def newton_cluster_localize(
    config: ReceiverConfig,
    tau,
    starts: int = 256,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
    maxit: int = 200,
) -> List[Vec2]:
    """Solve ``d1 - d0 = tau1, d2 - d0 = tau2`` by damped Newton from random starts.

    Starts are uniform in a square of side ``10 * max(d10, d20)`` centred
    on the receivers' centroid.  Converged points are merged when closer
    than ``CLUSTER_RADIUS``; points beyond ``FAR_RANGE`` spans are dropped.
    """
    if starts < 16:
        raise ValueError("need at least 16 starts")
    rng = rng if rng is not None else np.random.default_rng(seed)
    m = config.points
    d10, d20, _ = config.side_lengths
    half = 5.0 * max(d10, d20)
    centre = m.mean(axis=0)
    x0 = centre + rng.uniform(-half, half, size=(starts, 2))
    tau = np.asarray([float(tau[0]), float(tau[1])])
    roots, ok = _kernels.newton_batch(m, tau, np.ascontiguousarray(x0), maxit, CONVERGENCE_TOL)
    # iterates that ran off to infinity cancel the range differences to zero
    ok &= np.hypot(roots[:, 0] - centre[0], roots[:, 1] - centre[1]) < FAR_RANGE * config.length_scale
    reps: List[np.ndarray] = []
    for r in roots[ok]:
        if all(np.hypot(*(r - q)) > CLUSTER_RADIUS * (1.0 + np.hypot(*q)) for q in reps):
            reps.append(r)
    reps.sort(key=lambda q: float(np.hypot(*(q - m[0]))))
    return [Vec2(float(q[0]), float(q[1])) for q in reps]


@dataclass
class SignMapReport:
    grid_extent: Tuple[float, float, float, float]
    samples: int
    mismatches: int
    excluded: int
    mismatch_points: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def to_json_dict(self) -> dict:
        return {
            "grid_extent": list(self.grid_extent),
            "samples": self.samples,
            "mismatches": self.mismatches,
            "excluded": self.excluded,
            "mismatch_points": [list(p) for p in self.mismatch_points[:20]],
        }


def sign_map_compare(
    config: ReceiverConfig,
    box: Sequence[float] = (-6.0, 6.0, -6.0, 6.0),
    n: int = 200,
    curve_tol: float = ON_CURVE_BAND,
    ellipse_tol: float = ON_BAND,
) -> SignMapReport:
    """Compare ``sign F(x)`` with ``sign a(tau2(x))`` on an ``n x n`` grid.

    Points inside either tolerance band are counted as excluded, not as
    mismatches.
    """
    if n < 100:
        raise ValueError("grid needs n >= 100")
    xmin, xmax, ymin, ymax = (float(v) for v in box)
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, n), np.linspace(ymin, ymax, n))
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    f = build_quintic(config).value(pts[:, 0], pts[:, 1])
    a = ellipse_value(config, tau2_forward_array(config, pts))
    W2 = float(config.W) ** 2
    excluded = (np.abs(f) <= curve_band(config, pts, curve_tol)) | (np.abs(a) <= ellipse_tol * W2)
    bad = ~excluded & (np.sign(f) != np.sign(a))
    return SignMapReport(
        grid_extent=(xmin, xmax, ymin, ymax),
        samples=int(pts.shape[0]),
        mismatches=int(bad.sum()),
        excluded=int(excluded.sum()),
        mismatch_points=[(float(p[0]), float(p[1])) for p in pts[bad]],
    )


def relative_deviation(config: ReceiverConfig, pts, numeric, exact) -> np.ndarray:
    """``|numeric - exact| / max(|exact|, W^8 * (1 + (r/L)^5))``."""
    W8 = float(config.W) ** 8
    scale = np.maximum(np.abs(exact), W8 * curve_band(config, pts, 1.0))
    return np.abs(numeric - exact) / scale


def numeric_vs_exact_F(
    config: ReceiverConfig,
    n: int = 1000,
    rng: Optional[np.random.Generator] = None,
    seed: int = 0,
    half_width: Optional[float] = None,
) -> float:
    """Largest relative gap between the float and the exact quintic at random points.

    Points are uniform in a square around the centroid, of half-width 5 by
    default (scaled with the receivers when they are spread further).
    """
    if n < 100:
        raise ValueError("need n >= 100")
    rng = rng if rng is not None else np.random.default_rng(seed)
    m = config.points
    half = half_width if half_width is not None else 5.0 * max(1.0, config.length_scale / 2.0)
    pts = m.mean(axis=0) + rng.uniform(-half, half, size=(n, 2))
    F = build_quintic(config).F
    exact = np.array([float(F.eval(Fraction(p[0]), Fraction(p[1]))) for p in pts])
    numeric = quintic_numeric(config, pts)
    return float(np.max(relative_deviation(config, pts, numeric, exact)))
