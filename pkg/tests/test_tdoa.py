import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdoa_bifurcation.tdoa import (
    FACET_IDS,
    TauRegion,
    classify_tau,
    ellipse_value,
    facet_slacks,
    polytope,
    polytope_membership,
    polytope_vertices,
    tangency_points,
    tau2_forward,
    tau2_forward_array,
)

from conftest import CONFIG1, CONFIG2


def test_forward_at_known_source(config1):
    t = tau2_forward(config1, (1, 1))
    assert t == pytest.approx((0.0, 0.0))
    t = tau2_forward(config1, (1, 0))
    assert t == pytest.approx((0.0, math.sqrt(5) - 1))


def test_ellipse_value_exact_and_float(config1):
    # a(tau) = |tau2*d10 - tau1*d20|^2 - W^2
    assert ellipse_value(config1, (Fraction(0), Fraction(0))) == -16
    assert ellipse_value(config1, (Fraction(2), Fraction(2))) == 0
    assert isinstance(ellipse_value(config1, (Fraction(1), 0)), Fraction)
    arr = ellipse_value(config1, np.array([[0.0, 0.0], [2.0, 2.0]]))
    assert arr == pytest.approx([-16.0, 0.0])


@pytest.mark.parametrize(
    "tau, region, count",
    [
        ((0, 0), TauRegion.InteriorUnique, 1),
        ((2, 2), TauRegion.ExcludedTangency, 0),
        ((3, 0), TauRegion.OutsideImage, 0),
    ],
)
def test_classify_examples(config1, tau, region, count):
    c = classify_tau(config1, tau)
    assert c.region is region
    assert c.expected_count == count


def test_classify_json(config1):
    d = classify_tau(config1, (0, 0)).to_json_dict()
    assert d["region"] == "InteriorUnique"
    assert len(d["facet_slacks"]) == 6


def test_vertices_form_hexagon(example_config):
    verts = polytope_vertices(example_config)
    assert len(verts) == 6
    for v in verts:
        slack = facet_slacks(example_config, v)
        assert np.sum(np.abs(slack) < 1e-9) == 2
    angles = [math.atan2(v[1], v[0]) for v in verts]
    assert angles == sorted(angles)
    assert len(polytope(example_config).facets) == 6


def test_vertices_config1(config1):
    r = 2 * math.sqrt(2)
    got = polytope_vertices(config1)
    for e in [(2.0, r), (-2.0, -r), (2.0, 0.0), (-2.0, 0.0), (r - 2, r), (2 - r, -r)]:
        assert min(math.hypot(e[0] - g[0], e[1] - g[1]) for g in got) < 1e-12


def test_tangency_points_touch_ellipse_and_facets(example_config):
    pts = tangency_points(example_config)
    W2 = float(example_config.W) ** 2
    for k, (fid, t) in enumerate(zip(FACET_IDS, pts)):
        assert abs(ellipse_value(example_config, t)) / W2 < 1e-12
        assert abs(facet_slacks(example_config, t)[k]) < 1e-12
        assert np.all(facet_slacks(example_config, t) > -1e-12)


def test_tangency_config1(config1):
    pts = tangency_points(config1)
    assert pts[0] == pytest.approx((2.0, 2.0))
    # antipodal pairs
    for i in range(0, 6, 2):
        assert pts[i] == pytest.approx((-pts[i + 1][0], -pts[i + 1][1]))


def test_membership(config1):
    assert polytope_membership(config1, (0, 0)).kind == "interior"
    assert polytope_membership(config1, (3, 0)).kind == "outside"
    m = polytope_membership(config1, (2, 1))
    assert m.kind == "boundary" and "tau1=+d10" in m.facets


@settings(max_examples=200, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_image_lies_in_polytope(x, y):
    for cfg in (CONFIG1, CONFIG2):
        t = tau2_forward_array(cfg, np.array([[x, y]]))[0]
        assert np.all(facet_slacks(cfg, t) >= -1e-9)
        assert classify_tau(cfg, t).region is not TauRegion.OutsideImage
