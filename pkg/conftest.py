import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from dual import build_cr_dual, build_wilson_dual  # noqa: E402
from mesh import build_rect_mesh, build_structured_tri_mesh  # noqa: E402
from problem import benchmark_problem  # noqa: E402


@pytest.fixture(scope='session')
def problem():
    return benchmark_problem()


@pytest.fixture
def tri22():
    mesh = build_structured_tri_mesh(2, 2)
    return mesh, build_cr_dual(mesh)


@pytest.fixture
def rect44():
    mesh = build_rect_mesh(4, 4)
    return mesh, build_wilson_dual(mesh)
