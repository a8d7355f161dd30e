import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from tdoa_bifurcation.bifurcation import (
    AtReceiver,
    PointRegion,
    asymptote_crossings,
    asymptotes,
    build_quintic,
    classify_point,
    classify_points,
    curve_point,
    derived_scalars,
    distance_to_curve,
    expected_leading_form,
    ideal_points,
    line_parametrization,
    restrict_to_line,
    lemma_identity_residual,
    meets_at_infinity_twice,
    normalized_value,
    quintic_numeric,
    residual_chain,
    sample_curve,
    vanishes_at,
)
from tdoa_bifurcation.exact import BivariatePoly
from tdoa_bifurcation.tdoa import ellipse_value, tau2_forward_array

from conftest import CONFIG1, CONFIG2, random_configs

X, Y = sp.symbols("x y")


def sympy_quintic(cfg):
    """F from the defining formula, with the ranges as free symbols.

    Every monomial must carry even powers of the ranges; replacing
    r_i^2 by |x - m_i|^2 then gives a polynomial in x, y.
    """
    r = sp.symbols("r0 r1 r2")
    m = [(sp.Rational(p[0].numerator, p[0].denominator), sp.Rational(p[1].numerator, p[1].denominator)) for p in cfg.receivers]
    side = [(m[2][0] - m[1][0], m[2][1] - m[1][1]), (m[0][0] - m[2][0], m[0][1] - m[2][1]), (m[1][0] - m[0][0], m[1][1] - m[0][1])]
    D = [(r[i] * side[i][0], r[i] * side[i][1]) for i in range(3)]
    dot = lambda u, v: u[0] * v[0] + u[1] * v[1]
    W = (m[1][0] - m[0][0]) * (m[2][1] - m[0][1]) - (m[1][1] - m[0][1]) * (m[2][0] - m[0][0])
    Q = sum(dot(Di, Di) for Di in D) - W**2
    P01, P12, P20 = dot(D[0], D[1]), dot(D[1], D[2]), dot(D[2], D[0])
    F = (Q**4 - 8 * Q**2 * (P01**2 + P12**2 + P20**2) + 64 * Q * P01 * P12 * P20
         + 16 * (P01**4 + P12**4 + P20**4) - 32 * (P01**2 * P12**2 + P12**2 * P20**2 + P20**2 * P01**2))
    s = [(X - m[i][0]) ** 2 + (Y - m[i][1]) ** 2 for i in range(3)]
    out = 0
    for (e0, e1, e2), c in sp.Poly(sp.expand(F), *r).terms():
        assert e0 % 2 == e1 % 2 == e2 % 2 == 0
        out += c * s[0] ** (e0 // 2) * s[1] ** (e1 // 2) * s[2] ** (e2 // 2)
    poly = sp.Poly(sp.expand(out), X, Y)
    return BivariatePoly({k: Fraction(int(c.p), int(c.q)) for k, c in poly.terms()})


@pytest.mark.parametrize("cfg", [CONFIG1, CONFIG2] + random_configs(3, seed=3))
def test_matches_independent_sympy_expansion(cfg):
    assert build_quintic(cfg).F == sympy_quintic(cfg)


def test_leading_form_config1(config1):
    lead = build_quintic(config1).normalized.homogeneous_component(5)
    assert lead == BivariatePoly({(4, 1): -4, (3, 2): 4, (2, 3): -4, (1, 4): 4})
    assert build_quintic(config1).F.homogeneous_component(5) == expected_leading_form(config1)


def test_permutation_invariance():
    for cfg in [CONFIG1] + random_configs(5, seed=9):
        F = build_quintic(cfg).F
        assert all(build_quintic(p).F == F for p in cfg.permutations())


def test_value_gradient_consistent_with_exact(example_config, rng):
    curve = build_quintic(example_config)
    pts = rng.uniform(-6, 6, size=(200, 2))
    exact = np.array([float(curve.normalized.eval(Fraction(x), Fraction(y))) for x, y in pts])
    got = curve.value(pts[:, 0], pts[:, 1])
    mag = curve.normalized.magnitude(pts[:, 0], pts[:, 1])
    assert np.all(np.abs(got - exact) <= 1e-12 * mag)
    raw = quintic_numeric(example_config, pts) / float(curve.W8)
    assert np.all(np.abs(raw - exact) <= 1e-9 * (1 + np.abs(exact)) * (1 + np.hypot(*pts.T) ** 5))


def test_receiver_values(example_config):
    for m in example_config.receivers:
        assert normalized_value(example_config, m) == 1


def test_derived_scalars(config1):
    s = derived_scalars(config1, (1.0, 1.0))
    assert s.W == 4.0
    assert s.Q == pytest.approx(s.D0**2 + s.D1**2 + s.D2**2 - 16)
    with pytest.raises(AtReceiver):
        derived_scalars(config1, (2.0, 0.0))
    assert math.isnan(derived_scalars(config1, (2.0, 0.0), normalized=False).p0)


def test_residual_chain_on_curve(config1):
    arcs = sample_curve(config1, 360)
    pts = np.vstack([a.points for a in arcs])
    rc = residual_chain(config1, pts)
    scale = 1 + np.hypot(*pts.T) ** 2
    for r in (rc.r2, rc.r3, rc.r4):
        assert np.max(np.abs(r) / scale) < 1e-9
    W8 = float(config1.W) ** 8
    assert np.max(np.abs(rc.r6) / (W8 * (1 + (np.hypot(*pts.T) / config1.length_scale) ** 5))) < 1e-8


def test_classify_point_examples(config1):
    assert classify_point(config1, (1, 1)) is PointRegion.UniqueRegion
    assert classify_point(config1, (Fraction(2), Fraction(0))) is PointRegion.AmbiguousRegion
    p = sample_curve(config1, 97)[0].points[3]
    assert classify_point(config1, p) is PointRegion.OnCurve
    assert list(classify_points(config1, np.array([[1.0, 1.0], [2.0, 0.0], p]))) == [-1, 1, 0]


def test_ideal_points(example_config):
    lead = build_quintic(example_config).F.homogeneous_component(5)
    pts = ideal_points(example_config)
    assert sum(p.is_real for p in pts) == 3
    assert len(pts) == 5
    assert all(vanishes_at(lead, p) for p in pts)


def test_asymptotes_config1(config1):
    lines = [ln.normalized().as_tuple() for ln in asymptotes(config1)]
    assert lines[0] == pytest.approx((1.0, 0.0, -1.5))
    assert lines[2] == pytest.approx((0.0, -1.0, 0.5))  # -8y + 4, sign kept
    assert all(meets_at_infinity_twice(config1, ln) for ln in asymptotes(config1))


def test_asymptote_crossings_config1(config1):
    # the middle line is an inflectional asymptote: contact 3 at infinity,
    # and the leftover quadratic 96t^2 + 24t + 73/32 has no real root
    assert asymptote_crossings(config1) == [1, 0, 1]
    base, direction = line_parametrization(asymptotes(config1)[1])
    coeffs = restrict_to_line(build_quintic(config1).normalized, base, direction)
    assert coeffs == [Fraction(-73, 32), -24, -96, 0, 0, 0]


@pytest.mark.parametrize("cfg", [CONFIG1, CONFIG2] + random_configs(30, seed=5))
def test_asymptote_crossings_parity(cfg):
    # a real line meets a real quintic in an odd number of real points
    # (with multiplicity, counting the contact at infinity)
    F = build_quintic(cfg).F
    for line in asymptotes(cfg):
        base, direction = line_parametrization(line)
        coeffs = restrict_to_line(F, base, direction)
        deg = max(k for k, c in enumerate(coeffs) if c != 0)
        real_finite = sum(1 for r in sp.Poly(list(reversed(coeffs)), sp.Symbol("t")).real_roots())
        assert (5 - deg + real_finite) % 2 == 1
    assert all(c in (0, 1, 3) for c in asymptote_crossings(cfg))


def test_lemma_identity_float_path(config1, rng):
    for x in rng.uniform(-50, 50, size=(100, 2)):
        assert abs(lemma_identity_residual(config1, tuple(x))) < 1e-10
    assert lemma_identity_residual(config1, (Fraction(1, 3), Fraction(7))) == 0


def test_distance_to_curve(config1):
    p = sample_curve(config1, 97)[1].points[5]
    assert distance_to_curve(config1, p).distance < 1e-10
    off = (p[0] + 0.01, p[1] - 0.02)
    d = distance_to_curve(config1, off, refine=True)
    assert 0 < d.distance < 0.05
    assert abs(build_quintic(config1).value(*d.foot)) < 1e-10


@pytest.mark.parametrize("n", [97, 360, 720, 1000])
def test_three_arcs(example_config, n):
    arcs = sample_curve(example_config, n)
    assert len(arcs) == 3
    for a in arcs:
        assert np.all(np.diff(a.thetas) > 0)
        assert np.all(np.isfinite(a.points))


def test_curve_point(config1):
    p = curve_point(config1, 1.0)
    assert p is not None
    assert abs(build_quintic(config1).value(*p)) < 1e-9


def test_sample_curve_rejects_tiny_n(config1):
    with pytest.raises(ValueError):
        sample_curve(config1, 2)


coords = st.floats(-20, 20, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(coords, coords)
def test_sign_of_F_matches_ellipse(x, y):
    for cfg in (CONFIG1, CONFIG2):
        f = build_quintic(cfg).value(x, y)
        a = ellipse_value(cfg, tau2_forward_array(cfg, np.array([[x, y]]))[0])
        if abs(f) > 1e-9 * (1 + math.hypot(x, y) ** 5) and abs(a) > 1e-9 * float(cfg.W) ** 2:
            assert np.sign(f) == np.sign(a)


def test_r6_matches_exact_F(example_config, rng):
    from tdoa_bifurcation.oracles import relative_deviation

    F = build_quintic(example_config).F
    pts = example_config.points.mean(axis=0) + rng.uniform(-5, 5, size=(1000, 2))
    exact = np.array([float(F.eval(Fraction(a), Fraction(b))) for a, b in pts])
    dev = relative_deviation(example_config, pts, residual_chain(example_config, pts).r6, exact)
    assert dev.max() < 1e-9
