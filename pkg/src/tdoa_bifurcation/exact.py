"""Exact rational scalars and sparse bivariate polynomials.

Coefficients are :class:`fractions.Fraction` values, so every ring
operation is exact.  A polynomial is stored as a mapping from exponent
pairs ``(i, j)`` (meaning ``x**i * y**j``) to nonzero coefficients.
"""

from __future__ import annotations

import json
import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

import numpy as np

from . import _kernels

Exponent = Tuple[int, int]
Scalar = Union[int, Fraction]


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"2"``, ``"-1/3"`` or a terminating decimal like ``"0.25"``.

    Floats are refused on purpose: they would silently carry binary
    rounding into quantities that are meant to be exact.
    """
    if isinstance(text, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string, got {type(text).__name__}")
    s = text.strip()
    if not s:
        raise ValueError("empty rational string")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            if int(den) == 0:
                raise ValueError(f"zero denominator in {text!r}")
            return Fraction(int(num), int(den))
        return Fraction(Decimal(s))
    except (InvalidOperation, ValueError) as exc:
        raise ValueError(f"cannot parse {text!r} as a rational") from exc


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class BivariatePoly:
    """Sparse polynomial in ``x`` and ``y`` with rational coefficients.

    Instances are immutable; canonical form (no zero coefficients) is
    enforced on construction.
    """

    __slots__ = ("_terms", "_arrays")

    def __init__(self, terms: Union[Mapping[Exponent, Scalar], Iterable[Tuple[Exponent, Scalar]], None] = None):
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        clean: Dict[Exponent, Fraction] = {}
        for (i, j), c in items:
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent {(i, j)}")
            c = Fraction(c)
            if c:
                key = (int(i), int(j))
                total = clean.get(key, Fraction(0)) + c
                if total:
                    clean[key] = total
                else:
                    clean.pop(key, None)
        self._terms = clean
        self._arrays = None

    # construction helpers
    @classmethod
    def constant(cls, c: Scalar) -> "BivariatePoly":
        return cls({(0, 0): c})

    @classmethod
    def x(cls) -> "BivariatePoly":
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> "BivariatePoly":
        return cls({(0, 1): 1})

    @classmethod
    def zero(cls) -> "BivariatePoly":
        return cls()

    # mapping-ish access
    @property
    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._terms)

    def coeff(self, i: int, j: int) -> Fraction:
        return self._terms.get((i, j), Fraction(0))

    def __iter__(self) -> Iterator[Tuple[Exponent, Fraction]]:
        return iter(sorted(self._terms.items(), key=_term_order))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def total_degree(self) -> Union[int, None]:
        """Largest ``i + j`` over stored terms; ``None`` for the zero polynomial."""
        if not self._terms:
            return None
        return max(i + j for i, j in self._terms)

    # ring operations
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return BivariatePoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Exponent, Fraction] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return BivariatePoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, BivariatePoly):
            return NotImplemented
        q = Fraction(other)
        if q == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return BivariatePoly({k: c / q for k, c in self._terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = BivariatePoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"BivariatePoly({self.to_string()})"

    # calculus and structure
    def diff(self, var: str) -> "BivariatePoly":
        if var == "x":
            return BivariatePoly({(i - 1, j): c * i for (i, j), c in self._terms.items() if i})
        if var == "y":
            return BivariatePoly({(i, j - 1): c * j for (i, j), c in self._terms.items() if j})
        raise ValueError(f"unknown variable {var!r}")

    def shift(self, a: Scalar, b: Scalar) -> "BivariatePoly":
        """The polynomial ``(x, y) -> self(x + a, y + b)``, exact."""
        xs = _powers_poly(BivariatePoly({(1, 0): 1, (0, 0): a}), self._max_exp(0))
        ys = _powers_poly(BivariatePoly({(0, 1): 1, (0, 0): b}), self._max_exp(1))
        out: Dict[Exponent, Fraction] = {}
        for (i, j), c in self._terms.items():
            for k, v in (xs[i] * ys[j])._terms.items():
                out[k] = out.get(k, 0) + c * v
        return BivariatePoly(out)

    def homogeneous_component(self, d: int) -> "BivariatePoly":
        return BivariatePoly({k: c for k, c in self._terms.items() if k[0] + k[1] == d})

    # evaluation
    def __call__(self, x, y):
        return self.eval(x, y)

    def eval(self, x, y) -> Fraction:
        """Exact value at rational (or float, taken at its exact binary value) ``x, y``."""
        x = Fraction(x)
        y = Fraction(y)
        xp = _powers(x, self._max_exp(0))
        yp = _powers(y, self._max_exp(1))
        return sum((c * xp[i] * yp[j] for (i, j), c in self._terms.items()), Fraction(0))

    def eval_gaussian(self, x: Tuple[Scalar, Scalar], y: Tuple[Scalar, Scalar]) -> Tuple[Fraction, Fraction]:
        """Exact value at complex arguments given as ``(real, imag)`` rational pairs."""
        xp = _cpowers((Fraction(x[0]), Fraction(x[1])), self._max_exp(0))
        yp = _cpowers((Fraction(y[0]), Fraction(y[1])), self._max_exp(1))
        re = Fraction(0)
        im = Fraction(0)
        for (i, j), c in self._terms.items():
            a, b = xp[i]
            e, f = yp[j]
            re += c * (a * e - b * f)
            im += c * (a * f + b * e)
        return re, im

    def evalf(self, x: float, y: float) -> float:
        """Float value at a single point with compensated summation."""
        return math.fsum(float(c) * x**i * y**j for (i, j), c in self._terms.items())

    def evalf_array(self, x, y) -> np.ndarray:
        """Float values on arrays of points (broadcast ``x`` against ``y``)."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        ii, jj, cc = self._term_arrays()
        flat = _kernels.poly_eval(ii, jj, cc, np.ascontiguousarray(x).ravel(), np.ascontiguousarray(y).ravel())
        return flat.reshape(x.shape)

    def magnitude(self, x, y) -> np.ndarray:
        """Sum of absolute term values; the natural rounding scale for ``evalf``."""
        x, y = np.broadcast_arrays(np.abs(np.asarray(x, dtype=float)), np.abs(np.asarray(y, dtype=float)))
        ii, jj, cc = self._term_arrays()
        flat = _kernels.poly_eval(ii, jj, np.abs(cc), np.ascontiguousarray(x).ravel(), np.ascontiguousarray(y).ravel())
        return flat.reshape(x.shape)

    def _term_arrays(self):
        if self._arrays is None:
            items = sorted(self._terms.items(), key=_term_order)
            ii = np.array([k[0] for k, _ in items], dtype=np.int64)
            jj = np.array([k[1] for k, _ in items], dtype=np.int64)
            cc = np.array([float(c) for _, c in items], dtype=float)
            self._arrays = (ii, jj, cc)
        return self._arrays

    def _max_exp(self, axis: int) -> int:
        return max((k[axis] for k in self._terms), default=0)

    # serialization
    def to_records(self) -> list:
        return [{"i": i, "j": j, "c": format_rational(c)} for (i, j), c in self]

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "BivariatePoly":
        terms: Dict[Exponent, Fraction] = {}
        for rec in records:
            key = (int(rec["i"]), int(rec["j"]))
            if key in terms:
                raise ValueError(f"duplicate exponent pair {key}")
            terms[key] = parse_rational(rec["c"])
        return cls(terms)

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_json(cls, text: str) -> "BivariatePoly":
        return cls.from_records(json.loads(text))

    def to_string(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in self:
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v for v, e in (("x", i), ("y", j)) if e
            )
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("-" if c < 0 else "+", body))
        head_sign, head = parts[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _term_order(item):
    (i, j), _ = item
    return (-(i + j), -i)


def _coerce(other):
    if isinstance(other, BivariatePoly):
        return other
    if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
        return BivariatePoly.constant(other)
    return NotImplemented


def _powers(v: Fraction, n: int):
    out = [Fraction(1)]
    for _ in range(n):
        out.append(out[-1] * v)
    return out


def _powers_poly(p: "BivariatePoly", n: int):
    out = [BivariatePoly.constant(1)]
    for _ in range(n):
        out.append(out[-1] * p)
    return out


def _cpowers(v: Tuple[Fraction, Fraction], n: int):
    out = [(Fraction(1), Fraction(0))]
    a, b = v
    for _ in range(n):
        c, d = out[-1]
        out.append((c * a - d * b, c * b + d * a))
    return out


# Module-level aliases matching the operation names used elsewhere.
def poly_add(p: BivariatePoly, q: BivariatePoly) -> BivariatePoly:
    return p + q


def poly_mul(p: BivariatePoly, q: BivariatePoly) -> BivariatePoly:
    return p * q


def poly_eval(p: BivariatePoly, x, y) -> Fraction:
    return p.eval(x, y)


def poly_diff(p: BivariatePoly, var: str) -> BivariatePoly:
    return p.diff(var)


def homogeneous_component(p: BivariatePoly, d: int) -> BivariatePoly:
    return p.homogeneous_component(d)
