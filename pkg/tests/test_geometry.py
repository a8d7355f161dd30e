import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdoa_bifurcation.geometry import (
    AffineLine,
    CollinearReceivers,
    Vec2,
    config_from_dict,
    load_config,
    make_config,
    wedge_star,
)


def test_difference_convention(config1):
    # d_ji = m_j - m_i
    assert config1.d10 == (2, 0)
    assert config1.d20 == (2, 2)
    assert config1.d21 == (0, 2)
    assert config1.d01 == (-2, 0)
    assert config1.W == wedge_star(config1.d10, config1.d20) == 4


def test_scalars(config1):
    assert (config1.d10_sq, config1.d20_sq, config1.d21_sq) == (4, 8, 4)
    assert config1.c01 == config1.d12.dot(config1.d20)
    assert config1.c12 == config1.d20.dot(config1.d01)
    assert config1.c20 == config1.d01.dot(config1.d12)


def test_collinear_rejected():
    with pytest.raises(CollinearReceivers):
        make_config((0, 0), (1, 1), (2, 2))


def test_float_coordinates_refused():
    with pytest.raises(ValueError):
        make_config((0.5, 0), (1, 0), (0, 1))


def test_from_dict_and_file(tmp_path):
    data = {"receivers": [["0", "0"], ["2", "0"], ["2", "2"]], "tolerances": {"curve": 1e-8}}
    cfg = config_from_dict(data)
    assert cfg.tolerances["curve"] == 1e-8
    path = tmp_path / "r.json"
    path.write_text(json.dumps(cfg.to_json_dict()))
    again = load_config(path)
    assert again.receivers == cfg.receivers


@pytest.mark.parametrize("bad", [{}, {"receivers": [["0", "0"], ["1", "0"]]}, {"receivers": [["0"], ["1", "0"], ["0", "1"]]}])
def test_from_dict_rejects(bad):
    with pytest.raises(ValueError):
        config_from_dict(bad)


def test_permutations_keep_area_magnitude(config1):
    perms = list(config1.permutations())
    assert len(perms) == 6
    assert {abs(p.W) for p in perms} == {4}
    assert {p.W for p in perms} == {4, -4}


ints = st.integers(-100, 100)


@given(ints, ints, ints, ints)
def test_wedge_antisymmetric(a, b, c, d):
    u, v = Vec2(a, b), Vec2(c, d)
    assert wedge_star(u, v) == -wedge_star(v, u)
    assert wedge_star(u, u) == 0


def test_affine_line():
    ln = AffineLine(Fraction(1), Fraction(-1), Fraction(0))
    other = AffineLine(Fraction(0), Fraction(1), Fraction(-2))
    assert ln.intersect(other) == (2, 2)
    assert ln.value(*ln.point()) == 0
    assert ln.intersect(AffineLine(2, -2, 5)) is None
    assert ln.direction == (1, 1)
    with pytest.raises(ValueError):
        AffineLine(0, 0, 1)
