"""The bifurcation quintic: exact construction, sign test, asymptotes, sampling.

With ``s_i = |x - m_i|**2`` every product of ranges in the defining
formula for ``F`` appears squared (or as ``P01*P12*P20``), so ``F`` is a
polynomial in ``x, y`` and can be assembled exactly over the rationals.
The degree-8, 7 and 6 parts cancel, leaving a quintic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exact import BivariatePoly
from .geometry import AffineLine, ReceiverConfig, Vec2, wedge_star
from .localize import FAR_RANGE, localize_many

#: relative band on F/W^8 for "on the curve"
ON_CURVE_BAND = 1e-9


class AtReceiver(ValueError):
    """A quantity normalized by ``d_i(x)`` was requested at ``x = m_i``."""


class GradientVanishes(ArithmeticError):
    """``grad F`` is numerically zero, so the first-order distance is undefined."""


# ---------------------------------------------------------------------------
# scalars of the construction


@dataclass(frozen=True)
class DerivedScalars:
    D0: float
    D1: float
    D2: float
    Q: float
    P01: float
    P12: float
    P20: float
    p0: float
    p1: float
    p2: float
    p01: float
    p12: float
    p20: float
    W: float


def _ranges(config: ReceiverConfig, x):
    m = config.points
    x = np.asarray(x, dtype=float)
    return [np.hypot(x[..., 0] - m[i, 0], x[..., 1] - m[i, 1]) for i in range(3)]


def _fvec(v):
    return np.array([float(v[0]), float(v[1])])


def derived_scalars(config: ReceiverConfig, x, normalized: bool = True) -> DerivedScalars:
    """Scaled range vectors ``D_i = d_i(x) * d_jk`` and the quantities built on them.

    With ``normalized=False`` the ratios ``p_i`` and ``p_ij`` come back as
    NaN instead of raising at a receiver.
    """
    x = np.asarray(x, dtype=float)
    d = _ranges(config, x)
    sides = [_fvec(config.d12), _fvec(config.d20), _fvec(config.d01)]
    D = [d[i] * sides[i] for i in range(3)]
    d0vec = x - config.points[0]
    W = float(config.W)
    Q = sum(float(Di @ Di) for Di in D) - W * W
    P01, P12, P20 = float(D[0] @ D[1]), float(D[1] @ D[2]), float(D[2] @ D[0])
    if any(di == 0 for di in d):
        if normalized:
            raise AtReceiver(f"x={tuple(x)} coincides with a receiver")
        p = [math.nan] * 3
        p01 = p12 = p20 = math.nan
    else:
        p = [float(D[i] @ d0vec) / d[i] for i in range(3)]
        p01 = P01 / (d[0] * d[1])
        p12 = P12 / (d[1] * d[2])
        p20 = P20 / (d[2] * d[0])
    return DerivedScalars(
        D0=float(np.hypot(*D[0])), D1=float(np.hypot(*D[1])), D2=float(np.hypot(*D[2])),
        Q=Q, P01=P01, P12=P12, P20=P20,
        p0=p[0], p1=p[1], p2=p[2], p01=p01, p12=p12, p20=p20, W=W,
    )


# ---------------------------------------------------------------------------
# exact construction


@dataclass(frozen=True, eq=False)
class QuinticCurve:
    """Exact ``F`` with its partials and degree-5 part.

    Float evaluation goes through ``F/W^8`` re-expanded around the
    receivers' centroid, which keeps rounding proportional to the local
    size of the terms rather than to the distance from the origin.
    """

    config: ReceiverConfig
    F: BivariatePoly
    Fx: BivariatePoly
    Fy: BivariatePoly
    leading_form: BivariatePoly
    W8: Fraction

    @cached_property
    def normalized(self) -> BivariatePoly:
        """``F / W^8``; equal to 1 at every receiver."""
        return self.F / self.W8

    @cached_property
    def origin(self) -> Tuple[Fraction, Fraction]:
        ms = self.config.receivers
        return (sum(m[0] for m in ms) / 3, sum(m[1] for m in ms) / 3)

    @cached_property
    def _local(self):
        ox, oy = self.origin
        f = self.normalized.shift(ox, oy)
        return f, f.diff("x"), f.diff("y")

    def _rel(self, x, y):
        ox, oy = self.origin
        return np.asarray(x, dtype=float) - float(ox), np.asarray(y, dtype=float) - float(oy)

    def value(self, x, y) -> np.ndarray:
        """Float ``F/W^8`` on arrays."""
        return self._local[0].evalf_array(*self._rel(x, y))

    def gradient(self, x, y) -> Tuple[np.ndarray, np.ndarray]:
        """Float gradient of ``F/W^8`` on arrays."""
        u, v = self._rel(x, y)
        return self._local[1].evalf_array(u, v), self._local[2].evalf_array(u, v)

    def magnitude(self, x, y) -> np.ndarray:
        """Rounding scale of :meth:`value` (sum of absolute local terms)."""
        return self._local[0].magnitude(*self._rel(x, y))

    def gradient_magnitude(self, x, y) -> np.ndarray:
        u, v = self._rel(x, y)
        return self._local[1].magnitude(u, v) + self._local[2].magnitude(u, v)


def squared_range_polys(config: ReceiverConfig) -> List[BivariatePoly]:
    X, Y = BivariatePoly.x(), BivariatePoly.y()
    return [(X - m[0]) ** 2 + (Y - m[1]) ** 2 for m in config.receivers]


def quintic_polynomial(config: ReceiverConfig) -> BivariatePoly:
    """Raw ``F`` (not divided by ``W^8``), exact."""
    s0, s1, s2 = squared_range_polys(config)
    W = config.W
    c01, c12, c20 = config.c01, config.c12, config.c20
    Q = s0 * config.d12_sq + s1 * config.d20_sq + s2 * config.d01_sq - W**2
    P01_2 = s0 * s1 * c01**2
    P12_2 = s1 * s2 * c12**2
    P20_2 = s2 * s0 * c20**2
    P_prod = s0 * s1 * s2 * (c01 * c12 * c20)
    Q2 = Q * Q
    return (
        Q2 * Q2
        - 8 * Q2 * (P01_2 + P12_2 + P20_2)
        + 64 * Q * P_prod
        + 16 * (P01_2 * P01_2 + P12_2 * P12_2 + P20_2 * P20_2)
        - 32 * (P01_2 * P12_2 + P12_2 * P20_2 + P20_2 * P01_2)
    )


@lru_cache(maxsize=256)
def build_quintic(config: ReceiverConfig) -> QuinticCurve:
    F = quintic_polynomial(config)
    return QuinticCurve(
        config=config,
        F=F,
        Fx=F.diff("x"),
        Fy=F.diff("y"),
        leading_form=F.homogeneous_component(5),
        W8=config.W**8,
    )


def expected_leading_form(config: ReceiverConfig) -> BivariatePoly:
    """``-64 W d01^2 d12^2 d20^2 (x^2+y^2) *(d12^x) *(d20^x) *(d01^x)``."""
    X, Y = BivariatePoly.x(), BivariatePoly.y()
    pos = (X, Y)
    k = -64 * config.W * config.d01_sq * config.d12_sq * config.d20_sq
    out = (X * X + Y * Y) * k
    for u in (config.d12, config.d20, config.d01):
        out = out * wedge_star(u, pos)
    return out


def verify_leading_form(config: ReceiverConfig) -> bool:
    return build_quintic(config).leading_form == expected_leading_form(config)


# ---------------------------------------------------------------------------
# numeric route through the derivation


class ResidualChain(NamedTuple):
    r2: float
    r3: float
    r4: float
    r5: float
    r6: float


def _numeric_parts(config: ReceiverConfig, pts):
    pts = np.asarray(pts, dtype=float)
    d = _ranges(config, pts)
    sides = [_fvec(config.d12), _fvec(config.d20), _fvec(config.d01)]
    D = [d[i][..., None] * sides[i] for i in range(3)]
    W = float(config.W)
    Dsq = [np.sum(Di * Di, axis=-1) for Di in D]
    Q = Dsq[0] + Dsq[1] + Dsq[2] - W * W
    P01 = np.sum(D[0] * D[1], axis=-1)
    P12 = np.sum(D[1] * D[2], axis=-1)
    P20 = np.sum(D[2] * D[0], axis=-1)
    return D, Dsq, Q, P01, P12, P20, W


def residual_chain(config: ReceiverConfig, x) -> ResidualChain:
    """Left minus right of each step from the ellipse condition to ``F = 0``.

    ``r6`` is numerically ``F(x)`` (raw, not normalized).
    """
    D, Dsq, Q, P01, P12, P20, W = _numeric_parts(config, x)
    S = D[0] + D[1] + D[2]
    r2 = np.sum(S * S, axis=-1) - W * W
    r3 = Dsq[0] + Dsq[1] + Dsq[2] + 2 * (P01 + P12 + P20) - W * W
    r4 = Q + 2 * P12 + 2 * (P01 + P20)
    lhs5 = Q * Q - 4 * (P01 * P01 - P12 * P12 + P20 * P20)
    r5 = lhs5 + 4 * Q * P12 - 8 * P01 * P20
    r6 = lhs5 * lhs5 - 16 * Q * Q * P12 * P12 + 64 * Q * P01 * P12 * P20 - 64 * P01 * P01 * P20 * P20
    vals = [r2, r3, r4, r5, r6]
    if np.ndim(r2) == 0:
        vals = [float(v) for v in vals]
    return ResidualChain(*vals)


def quintic_numeric(config: ReceiverConfig, pts) -> np.ndarray:
    """Raw ``F`` evaluated term by term from float ranges (no expansion)."""
    _, _, Q, P01, P12, P20, _ = _numeric_parts(config, pts)
    a, b, c = P01 * P01, P12 * P12, P20 * P20
    Q2 = Q * Q
    return (
        Q2 * Q2
        - 8 * Q2 * (a + b + c)
        + 64 * Q * P01 * P12 * P20
        + 16 * (a * a + b * b + c * c)
        - 32 * (a * b + b * c + c * a)
    )


# ---------------------------------------------------------------------------
# sign test


class PointRegion(enum.Enum):
    UniqueRegion = "UniqueRegion"
    AmbiguousRegion = "AmbiguousRegion"
    OnCurve = "OnCurve"


def curve_band(config: ReceiverConfig, x, tol: float = ON_CURVE_BAND):
    """Tolerance on ``F/W^8`` at ``x``: ``tol * (1 + (|x - m0|/L)^5)``."""
    x = np.asarray(x, dtype=float)
    m0 = config.points[0]
    r = np.hypot(x[..., 0] - m0[0], x[..., 1] - m0[1]) / config.length_scale
    return tol * (1.0 + r**5)


def normalized_value(config: ReceiverConfig, x):
    """``F(x)/W^8``; exact ``Fraction`` for rational input, float otherwise."""
    curve = build_quintic(config)
    if all(isinstance(c, (int, Fraction)) for c in x):
        return curve.F.eval(x[0], x[1]) / curve.W8
    return float(curve.value(float(x[0]), float(x[1])))


def classify_point(config: ReceiverConfig, x, tol: Optional[float] = None) -> PointRegion:
    """Unique localization where ``F < 0``, ambiguous where ``F > 0``."""
    tol = tol if tol is not None else config.tolerances.get("curve", ON_CURVE_BAND)
    f = normalized_value(config, x)
    band = float(curve_band(config, [float(x[0]), float(x[1])], tol))
    if abs(float(f)) <= band:
        return PointRegion.OnCurve
    return PointRegion.UniqueRegion if f < 0 else PointRegion.AmbiguousRegion


def classify_points(config: ReceiverConfig, pts, tol: float = ON_CURVE_BAND) -> np.ndarray:
    """Vectorised sign test: -1 unique, +1 ambiguous, 0 on the curve."""
    pts = np.asarray(pts, dtype=float)
    f = build_quintic(config).value(pts[..., 0], pts[..., 1])
    out = np.sign(f).astype(np.int8)
    out[np.abs(f) <= curve_band(config, pts, tol)] = 0
    return out


# ---------------------------------------------------------------------------
# asymptotes and ideal points


def asymptotes(config: ReceiverConfig) -> List[AffineLine]:
    """The lines ``4 *(d_jk ^ (x - m_i)) - 3W = 0`` for ``(i, jk) = (0,12), (1,20), (2,01)``.

    Coefficients are exact.
    """
    W = config.W
    lines = []
    for m, u in zip(config.receivers, (config.d12, config.d20, config.d01)):
        # *(u ^ (x - m)) = u1*(y - my) - u2*(x - mx)
        a = -4 * u[1]
        b = 4 * u[0]
        c = -4 * (u[0] * m[1] - u[1] * m[0]) - 3 * W
        lines.append(AffineLine(a, b, c))
    return lines


def asymptote_sum(config: ReceiverConfig) -> BivariatePoly:
    """Sum of the three asymptote left-hand sides as a polynomial (the constant ``-W``)."""
    X, Y = BivariatePoly.x(), BivariatePoly.y()
    total = BivariatePoly.zero()
    for ln in asymptotes(config):
        total = total + X * ln.a + Y * ln.b + ln.c
    return total


@dataclass(frozen=True)
class IdealPoint:
    """``[X : Y : 0]`` scaled so the larger-magnitude coordinate is 1.

    Real points keep exact ``Fraction`` coordinates; the circular points
    use Python ``complex``.
    """

    X: object
    Y: object
    is_real: bool

    @classmethod
    def from_direction(cls, X, Y, is_real: bool = True) -> "IdealPoint":
        if X == 0 and Y == 0:
            raise ValueError("(0, 0) is not a projective point")
        lead = X if abs(X) >= abs(Y) else Y
        return cls(X / lead, Y / lead, is_real)

    def gaussian(self):
        def parts(z):
            if isinstance(z, complex):
                return Fraction(z.real), Fraction(z.imag)
            return Fraction(z), Fraction(0)

        return parts(self.X), parts(self.Y)


def ideal_points(config: ReceiverConfig) -> List[IdealPoint]:
    pts = [IdealPoint.from_direction(u[0], u[1]) for u in (config.d12, config.d20, config.d01)]
    pts.append(IdealPoint(complex(1, 0), complex(0, 1), False))
    pts.append(IdealPoint(complex(1, 0), complex(0, -1), False))
    return pts


def vanishes_at(poly: BivariatePoly, point: IdealPoint) -> bool:
    x, y = point.gaussian()
    re, im = poly.eval_gaussian(x, y)
    return re == 0 and im == 0


def restrict_to_line(poly: BivariatePoly, base, direction) -> List[Fraction]:
    """Coefficients ``[c0, c1, ...]`` of ``t -> poly(base + t*direction)``, exact."""
    bx, by = Fraction(base[0]), Fraction(base[1])
    vx, vy = Fraction(direction[0]), Fraction(direction[1])
    deg = poly.total_degree or 0
    xp = [[Fraction(1)]]
    yp = [[Fraction(1)]]
    for _ in range(deg):
        xp.append(_umul(xp[-1], [bx, vx]))
        yp.append(_umul(yp[-1], [by, vy]))
    out = [Fraction(0)] * (deg + 1)
    for (i, j), c in poly:
        for k, v in enumerate(_umul(xp[i], yp[j])):
            out[k] += c * v
    return out


def _umul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def line_parametrization(line: AffineLine) -> Tuple[Vec2, Vec2]:
    """Exact ``(base point, direction)`` for a line with rational coefficients."""
    return line.point(), line.direction


def meets_at_infinity_twice(config: ReceiverConfig, line: AffineLine) -> bool:
    """True when ``F`` restricted to ``line`` loses its two top coefficients.

    That is the projective statement that the line meets the curve at its
    ideal point with multiplicity at least two.
    """
    base, direction = line_parametrization(line)
    coeffs = restrict_to_line(build_quintic(config).F, base, direction)
    return coeffs[5] == 0 and coeffs[4] == 0


def real_root_count(coeffs: Sequence[Fraction]) -> int:
    """Distinct real roots of a univariate polynomial of degree at most 3 (exact)."""
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    deg = len(c) - 1
    if deg <= 0:
        raise ValueError("constant polynomial")
    if deg == 1:
        return 1
    if deg == 2:
        disc = c[1] ** 2 - 4 * c[2] * c[0]
        return 2 if disc > 0 else (1 if disc == 0 else 0)
    if deg == 3:
        d, cc, b, a = c
        disc = 18 * a * b * cc * d - 4 * b**3 * d + b**2 * cc**2 - 4 * a * cc**3 - 27 * a**2 * d**2
        if disc > 0:
            return 3
        if disc < 0:
            return 1
        # repeated root: triple iff the derivative's discriminant also vanishes
        return 1 if b * b - 3 * a * cc == 0 else 2
    raise ValueError("degree above 3")


def asymptote_crossings(config: ReceiverConfig) -> List[int]:
    """Number of distinct finite real points where each asymptote meets the curve."""
    F = build_quintic(config).F
    out = []
    for line in asymptotes(config):
        base, direction = line_parametrization(line)
        out.append(real_root_count(restrict_to_line(F, base, direction)))
    return out


# ---------------------------------------------------------------------------
# lemma identity


def lemma_identity_residual(config: ReceiverConfig, x):
    """``*(d12^d0(x)) + *(d20^d1(x)) + *(d01^d2(x)) - 2W``; exact for rational ``x``."""
    if not all(isinstance(c, (int, Fraction)) for c in x):
        x = tuple(float(c) for c in x)
        total = 0.0
        for m, u in zip(config.receivers, (config.d12, config.d20, config.d01)):
            total += wedge_star((float(u[0]), float(u[1])), (x[0] - float(m[0]), x[1] - float(m[1])))
        return total - 2 * float(config.W)
    xv = Vec2(Fraction(x[0]), Fraction(x[1]))
    total = Fraction(0)
    for m, u in zip(config.receivers, (config.d12, config.d20, config.d01)):
        total += wedge_star(u, xv - m)
    return total - 2 * config.W


# ---------------------------------------------------------------------------
# distance to the curve


class CurveDistance(NamedTuple):
    distance: float
    foot: Optional[Tuple[float, float]]


def distance_to_curve(config: ReceiverConfig, x, refine: bool = False, max_iter: int = 60) -> CurveDistance:
    """First-order (Sampson) distance ``|F|/|grad F|``, optionally refined.

    With ``refine`` the point is pushed along the gradient until ``F``
    vanishes to rounding level and the Euclidean distance to that foot
    is returned.
    """
    curve = build_quintic(config)
    p = (float(x[0]), float(x[1]))

    def grad(q):
        g = curve.gradient(*q)
        gn = math.hypot(float(g[0]), float(g[1]))
        if gn <= 1e-12 * float(curve.gradient_magnitude(*q)):
            raise GradientVanishes(f"gradient of F vanishes at {q}")
        return (float(g[0]), float(g[1])), gn

    f = float(curve.value(*p))
    g, gn = grad(p)
    estimate = abs(f) / gn
    if not refine:
        return CurveDistance(estimate, None)

    q = p
    for _ in range(max_iter):
        f = float(curve.value(*q))
        if abs(f) <= 1e-14 * float(curve.magnitude(*q)):
            break
        g, gn = grad(q)
        step = f / (gn * gn)
        q = (q[0] - step * g[0], q[1] - step * g[1])
    f = float(curve.value(*q))
    if abs(f) > 1e-10 * float(curve.magnitude(*q)):
        raise ArithmeticError(f"projection onto the curve did not converge from {p}")
    return CurveDistance(math.hypot(p[0] - q[0], p[1] - q[1]), q)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class CurveArc:
    thetas: np.ndarray
    points: np.ndarray

    def __len__(self):
        return self.points.shape[0]


def ellipse_point(config: ReceiverConfig, theta):
    """Point of the ellipse in measurement space along angle ``theta``."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    d10, d20 = _fvec(config.d10), _fvec(config.d20)
    vx = s * d10[0] - c * d20[0]
    vy = s * d10[1] - c * d20[1]
    r = abs(float(config.W)) / np.sqrt(vx * vx + vy * vy)
    return np.stack([r * c, r * s], axis=-1)


def _curve_points(config: ReceiverConfig, thetas):
    taus = ellipse_point(config, thetas)
    batch = localize_many(config, taus)
    n = len(thetas)
    pts = np.full((n, 2), np.nan)
    have = batch.counts > 0
    pts[have] = batch.sources[have, 0, :]
    d0 = batch.d0[:, 0]
    have &= d0 < FAR_RANGE * config.length_scale
    if have.any():
        curve = build_quintic(config)
        q = pts[have]
        f = curve.value(q[:, 0], q[:, 1])
        gx, gy = curve.gradient(q[:, 0], q[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            sampson = np.abs(f) / np.hypot(gx, gy)
        keep = np.zeros(n, dtype=bool)
        keep[np.flatnonzero(have)[sampson < 1e-6]] = True
        have = keep
    pts[~have] = np.nan
    return pts, have


def curve_point(config: ReceiverConfig, theta: float) -> Optional[Vec2]:
    """The finite source over the ellipse point at ``theta``, if any."""
    pts, ok = _curve_points(config, np.array([theta]))
    return Vec2(float(pts[0, 0]), float(pts[0, 1])) if ok[0] else None


def _split_jumps(idx: List[int], pts: np.ndarray, factor: float = 10.0) -> List[List[int]]:
    if len(idx) < 3:
        return [idx]
    p = pts[idx]
    steps = np.hypot(*(p[1:] - p[:-1]).T)
    cuts = []
    # only steps with neighbours on both sides are judged: the run ends
    # approach infinity and their spacing blows up legitimately
    for k in range(1, len(steps) - 1):
        s = steps[k]
        nb = [steps[j] for j in range(k - 2, k + 3) if j != k and 0 <= j < len(steps)]
        med = float(np.median(nb))
        if med > 0 and s > factor * med:
            cuts.append(k + 1)
    out, start = [], 0
    for c in cuts:
        out.append(idx[start:c])
        start = c
    out.append(idx[start:])
    return out


def sample_curve(config: ReceiverConfig, n: int) -> List[CurveArc]:
    """Trace the real curve as the preimage of ``n`` equally spaced ellipse points.

    Arcs break where no finite preimage exists (near the tangency points
    the preimage runs off to infinity) and at isolated jumps.
    """
    if n < 3:
        raise ValueError("need at least 3 samples")
    thetas = 2 * np.pi * np.arange(n) / n
    pts, ok = _curve_points(config, thetas)

    runs: List[List[int]] = []
    cur: List[int] = []
    for k in range(n):
        if ok[k]:
            cur.append(k)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n - 1:
        runs[0] = runs.pop() + runs[0]

    arcs = []
    for run in runs:
        for piece in _split_jumps(run, pts):
            if piece:
                th = thetas[piece]
                # unwrap so angles increase along an arc that crossed theta = 0
                th = th + 2 * np.pi * np.cumsum(np.diff(th, prepend=th[0]) < 0)
                arcs.append(CurveArc(thetas=th, points=pts[piece].copy()))
    return arcs
