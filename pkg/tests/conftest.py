import random
from fractions import Fraction

import numpy as np
import pytest

from tdoa_bifurcation import make_config

CONFIG1 = make_config((0, 0), (2, 0), (2, 2))
CONFIG2 = make_config((0, 0), (2, 0), (-2, 2))


def random_rational(rnd: random.Random, lo=-20, hi=20, den=12) -> Fraction:
    return Fraction(rnd.randint(lo * den, hi * den), rnd.randint(1, den))


def random_configs(n: int, seed: int = 1234):
    rnd = random.Random(seed)
    out = []
    while len(out) < n:
        pts = [(random_rational(rnd), random_rational(rnd)) for _ in range(3)]
        (ax, ay), (bx, by), (cx, cy) = pts
        if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) == 0:
            continue
        out.append(make_config(*pts))
    return out


@pytest.fixture
def config1():
    return CONFIG1


@pytest.fixture
def config2():
    return CONFIG2


@pytest.fixture(params=["config1", "config2"])
def example_config(request):
    return {"config1": CONFIG1, "config2": CONFIG2}[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
