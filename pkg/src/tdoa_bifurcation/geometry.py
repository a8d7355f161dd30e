"""Plane primitives and validated three-receiver configurations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from itertools import permutations
from pathlib import Path
from typing import Dict, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .exact import parse_rational


class CollinearReceivers(ValueError):
    """The three receivers lie on one line (W = 0)."""


class Vec2(NamedTuple):
    x1: object
    x2: object

    def __sub__(self, other):
        return Vec2(self.x1 - other[0], self.x2 - other[1])

    def __add__(self, other):
        return Vec2(self.x1 + other[0], self.x2 + other[1])

    def __neg__(self):
        return Vec2(-self.x1, -self.x2)

    def scale(self, k):
        return Vec2(k * self.x1, k * self.x2)

    def dot(self, other):
        return self.x1 * other[0] + self.x2 * other[1]

    def norm2(self):
        return self.dot(self)


def wedge_star(u, v):
    """Signed area ``u1*v2 - u2*v1`` of the parallelogram on ``u, v``."""
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class ReceiverConfig:
    """Three non-collinear receivers with their derived constants.

    Displacements follow ``d_ji = m_j - m_i``.  All derived values are
    exact when the positions are rational.
    """

    m0: Vec2
    m1: Vec2
    m2: Vec2
    tolerances: Dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ms = [Vec2(*(Fraction(c) for c in m)) for m in (self.m0, self.m1, self.m2)]
        object.__setattr__(self, "m0", ms[0])
        object.__setattr__(self, "m1", ms[1])
        object.__setattr__(self, "m2", ms[2])
        if self.W == 0:
            raise CollinearReceivers(
                f"receivers {[tuple(str(c) for c in m) for m in ms]} are collinear"
            )

    @property
    def receivers(self) -> Tuple[Vec2, Vec2, Vec2]:
        return (self.m0, self.m1, self.m2)

    def d(self, j: int, i: int) -> Vec2:
        ms = self.receivers
        return ms[j] - ms[i]

    # named displacements
    @cached_property
    def d10(self) -> Vec2:
        return self.d(1, 0)

    @cached_property
    def d20(self) -> Vec2:
        return self.d(2, 0)

    @cached_property
    def d21(self) -> Vec2:
        return self.d(2, 1)

    @cached_property
    def d01(self) -> Vec2:
        return self.d(0, 1)

    @cached_property
    def d12(self) -> Vec2:
        return self.d(1, 2)

    # squared side lengths: d10_sq == d01_sq etc.
    @cached_property
    def d10_sq(self) -> Fraction:
        return self.d10.norm2()

    @cached_property
    def d20_sq(self) -> Fraction:
        return self.d20.norm2()

    @cached_property
    def d21_sq(self) -> Fraction:
        return self.d21.norm2()

    @property
    def d01_sq(self) -> Fraction:
        return self.d10_sq

    @property
    def d12_sq(self) -> Fraction:
        return self.d21_sq

    @cached_property
    def c01(self) -> Fraction:
        return self.d12.dot(self.d20)

    @cached_property
    def c12(self) -> Fraction:
        return self.d20.dot(self.d01)

    @cached_property
    def c20(self) -> Fraction:
        return self.d01.dot(self.d12)

    @cached_property
    def W(self) -> Fraction:
        return wedge_star(self.d10, self.d20)

    # float views for numeric work
    @cached_property
    def points(self) -> np.ndarray:
        return np.array([[float(c) for c in m] for m in self.receivers], dtype=float)

    @cached_property
    def side_lengths(self) -> Tuple[float, float, float]:
        """``(d10, d20, d21)`` as floats."""
        return (
            float(np.sqrt(float(self.d10_sq))),
            float(np.sqrt(float(self.d20_sq))),
            float(np.sqrt(float(self.d21_sq))),
        )

    @cached_property
    def length_scale(self) -> float:
        return max(self.side_lengths)

    def permuted(self, order: Sequence[int]) -> "ReceiverConfig":
        ms = self.receivers
        return ReceiverConfig(*(ms[k] for k in order), tolerances=self.tolerances)

    def permutations(self):
        return [self.permuted(p) for p in permutations(range(3))]

    def to_json_dict(self) -> dict:
        return {"receivers": [[_fmt(c) for c in m] for m in self.receivers]}


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def make_config(m0, m1, m2, tolerances=None) -> ReceiverConfig:
    """Build a configuration from three points given as rationals or rational strings."""
    pts = [Vec2(parse_rational(p[0]), parse_rational(p[1])) for p in (m0, m1, m2)]
    return ReceiverConfig(*pts, tolerances=dict(tolerances or {}))


def config_from_dict(data: dict) -> ReceiverConfig:
    recs = data.get("receivers")
    if not isinstance(recs, list) or len(recs) != 3:
        raise ValueError("config needs exactly three receivers")
    for r in recs:
        if not isinstance(r, (list, tuple)) or len(r) != 2:
            raise ValueError(f"receiver {r!r} is not a coordinate pair")
    tols = data.get("tolerances") or {}
    if not isinstance(tols, dict):
        raise ValueError("tolerances must be an object")
    return make_config(*recs, tolerances={k: float(v) for k, v in tols.items()})


def load_config(path: Union[str, Path]) -> ReceiverConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


@dataclass(frozen=True)
class AffineLine:
    """The line ``a*x + b*y + c = 0``; coefficients kept exact when given exact."""

    a: object
    b: object
    c: object

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("degenerate line: (a, b) = (0, 0)")

    def value(self, x, y):
        return self.a * x + self.b * y + self.c

    def normalized(self) -> "AffineLine":
        """Float copy with ``(a, b)`` of unit length."""
        a, b, c = float(self.a), float(self.b), float(self.c)
        n = float(np.hypot(a, b))
        return AffineLine(a / n, b / n, c / n)

    @property
    def direction(self) -> Vec2:
        return Vec2(-self.b, self.a)

    def point(self) -> Vec2:
        """Foot of the perpendicular from the origin."""
        n2 = self.a * self.a + self.b * self.b
        return Vec2(-self.a * self.c / n2, -self.b * self.c / n2)

    def intersect(self, other: "AffineLine"):
        """Intersection point, or ``None`` for parallel lines."""
        det = self.a * other.b - self.b * other.a
        if det == 0:
            return None
        x = (self.b * other.c - self.c * other.b) / det
        y = (self.c * other.a - self.a * other.c) / det
        return Vec2(x, y)

    def as_tuple(self):
        return (self.a, self.b, self.c)
