"""Closed-form inverse of the TDOA map.

Writing ``d_i = d_0 + tau_i`` and subtracting ``d_0**2`` from ``d_i**2``
leaves two equations that are linear in ``(x, y, d_0)``.  Their solution
is a line ``x(d_0) = m0 + p + q*d_0``; putting it back into
``|x - m0| = d_0`` gives a quadratic in the range ``d_0``.  Roots of
the squared system that do not satisfy the original range differences
are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import _kernels
from .geometry import ReceiverConfig, Vec2

#: |A| below this means the quadratic has lost its leading term (tau on the ellipse).
DEGENERATE_TOL = 1e-12
#: relative discriminant band treated as a double root
DOUBLE_ROOT_TOL = 1e-14
#: round-trip residual bound, scaled by (1 + d0)
RESIDUAL_TOL = 1e-7
#: relative distance to a facet within which tau counts as on the boundary
BOUNDARY_TOL = 1e-9
#: ranges beyond this many receiver spans are rounding artefacts of a root at infinity
FAR_RANGE = 1e8


@dataclass(frozen=True)
class LocalizationResult:
    sources: List[Vec2] = field(default_factory=list)
    d0_roots: List[float] = field(default_factory=list)
    degenerate_linear: bool = False
    tangential: bool = False

    def __len__(self):
        return len(self.sources)

    def to_json_dict(self) -> dict:
        return {
            "sources": [[float(s.x1), float(s.x2)] for s in self.sources],
            "d0": [float(r) for r in self.d0_roots],
            "degenerate": bool(self.degenerate_linear),
            "tangential": bool(self.tangential),
        }


@dataclass
class BatchLocalization:
    """Vectorised results; rows with fewer than two sources are NaN-padded."""

    counts: np.ndarray
    sources: np.ndarray
    d0: np.ndarray
    degenerate: np.ndarray
    tangential: np.ndarray

    def __len__(self):
        return self.counts.shape[0]

    def result(self, k: int) -> LocalizationResult:
        n = int(self.counts[k])
        return LocalizationResult(
            sources=[Vec2(float(self.sources[k, s, 0]), float(self.sources[k, s, 1])) for s in range(n)],
            d0_roots=[float(self.d0[k, s]) for s in range(n)],
            degenerate_linear=bool(self.degenerate[k]),
            tangential=bool(self.tangential[k]),
        )


def localize_many(config: ReceiverConfig, taus, residual_tol: float = RESIDUAL_TOL) -> BatchLocalization:
    taus = np.ascontiguousarray(np.atleast_2d(np.asarray(taus, dtype=float)))
    if taus.shape[1] != 2:
        raise ValueError("taus must have shape (n, 2)")
    m = config.points
    counts, src, d0, deg, tang = _kernels.localize_batch(m, taus, DEGENERATE_TOL, DOUBLE_ROOT_TOL, residual_tol)
    # On a facet the two sources merge.  Rounding can leave such a tau a
    # hair outside, with a slightly negative discriminant: take the
    # double root and let the residual test decide.
    retry = np.flatnonzero((counts == 0) & _near_boundary(config, taus))
    if retry.size:
        c2, s2, r2, g2, t2 = _kernels.localize_batch_numpy(m, taus[retry], DEGENERATE_TOL, 1.0, residual_tol)
        hit = retry[c2 > 0]
        ok = c2 > 0
        counts[hit], src[hit], d0[hit], deg[hit], tang[hit] = c2[ok], s2[ok], r2[ok], g2[ok], t2[ok]
    far = d0 >= FAR_RANGE * config.length_scale
    if far.any():
        src[far] = np.nan
        d0[far] = np.nan
        # keep the finite source, if any, in slot 0
        flip = far[:, 0] & ~far[:, 1] & np.isfinite(d0[:, 1])
        src[flip] = src[flip][:, ::-1]
        d0[flip] = d0[flip][:, ::-1]
        counts = np.isfinite(d0).sum(axis=1).astype(np.int64)
    return BatchLocalization(counts, src, d0, deg, tang)


def _near_boundary(config: ReceiverConfig, taus: np.ndarray) -> np.ndarray:
    l10, l20, l21 = config.side_lengths
    t1, t2 = taus[:, 0], taus[:, 1]
    gaps = (np.abs(np.abs(t1) - l10) / l10, np.abs(np.abs(t2) - l20) / l20, np.abs(np.abs(t2 - t1) - l21) / l21)
    return (gaps[0] <= BOUNDARY_TOL) | (gaps[1] <= BOUNDARY_TOL) | (gaps[2] <= BOUNDARY_TOL)


def localize(config: ReceiverConfig, tau: Sequence[float], residual_tol: float = RESIDUAL_TOL) -> LocalizationResult:
    """All sources ``x`` with ``tau2_forward(x) == tau``, sorted by range to ``m0``.

    An empty result means ``tau`` is not a feasible measurement.
    """
    return localize_many(config, [tuple(float(t) for t in tau)], residual_tol).result(0)


def branch_residual(config: ReceiverConfig, tau, x):
    """``(d1 - d0 - tau1, d2 - d0 - tau2)`` at ``x``; zero iff ``x`` lies on both branches."""
    m = config.points
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    d = [np.hypot(x[..., 0] - m[i, 0], x[..., 1] - m[i, 1]) for i in range(3)]
    r1 = d[1] - d[0] - tau[..., 0]
    r2 = d[2] - d[0] - tau[..., 1]
    if np.ndim(r1) == 0:
        return float(r1), float(r2)
    return r1, r2
