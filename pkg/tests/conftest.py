import math

import numpy as np
import pytest

from stereohedra.groups3d import make_group
from stereohedra.stereohedron import enumerate_neighbors


def p1_cubic():
    return make_group(
        "P1",
        b1x=1, b1y=0, b1z=0,
        b2x=0, b2y=1, b2z=0,
        b3x=0, b3y=0, b3z=1,
    )


def p1_generic():
    # generic in-plane shear; the third basis vector stays vertical, which
    # the band machinery requires
    return make_group(
        "P1",
        b1x=1.0, b1y=0.0, b1z=0.0,
        b2x=0.17, b2y=1.07, b2z=0.0,
        b3x=0.0, b3y=0.0, b3z=0.93,
    )


@pytest.fixture(scope="session")
def group_p1_cubic():
    return p1_cubic()


@pytest.fixture(scope="session")
def group_p1_generic():
    return p1_generic()


@pytest.fixture(scope="session")
def report_exm31():
    g = make_group("P6_122", vert=12, horiz=100)
    base = (math.cos(math.pi / 12), math.sin(math.pi / 12), 0.5)
    return enumerate_neighbors(g, base)


@pytest.fixture(scope="session")
def report_exm32():
    g = make_group("P6_122", vert=100, horiz=950)
    return enumerate_neighbors(g, (1.0, math.tan(math.pi / 12), 4.0))


@pytest.fixture(scope="session")
def report_exm32_variant():
    g = make_group("P6_122", vert=100, horiz=950)
    return enumerate_neighbors(g, (1.0, math.tan(math.pi / 12), 100.0 / 24.0))


@pytest.fixture(scope="session")
def report_exm29():
    g = make_group("I4_122", horiz=4, vert=1)
    return enumerate_neighbors(g, (1.0, 0.5, 1.0 / 16.0))


@pytest.fixture(scope="session")
def report_p1_cube():
    return enumerate_neighbors(p1_cubic(), (0.3, 0.4, 0.5))
