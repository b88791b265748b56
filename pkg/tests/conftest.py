"""Shared fixtures and the acceptance summary printed at the end of a run."""
import numpy as np
import pytest

from thimc import hazzidakis as hz
from thimc import zoo
from thimc.surface import NullGrid

ACCEPTANCE = {}


def case1_data(theta=1.0, eps=1, u_range=(0.1, 0.6), v_range=(0.1, 0.6), n=129):
    """Exact Minkowski data rebuilt from the closed-form normal form q(t)."""
    grid = NullGrid.from_bounds(u_range, v_range, n)
    real = hz.realization("identity", grid, eps)
    t = hz.t_field(grid, eps)
    sol = hz.case1_closed_form(theta, eps, (t.min() - 0.01, t.max() + 0.01), 801, "C")
    return sol, real, grid, hz.reconstruct_surface(sol, real, grid)


@pytest.fixture(scope="session")
def case1_plus():
    """theta = 1, eps = +1: f = u, g = v, H = 1/(u+v) on [0.1, 0.6]^2."""
    return case1_data()


@pytest.fixture(scope="session")
def case1_minus():
    """theta = 0, eps = -1 on a rectangle where t = v - u stays positive."""
    return case1_data(0.0, -1, (0.1, 0.6), (0.8, 1.3))


@pytest.fixture(scope="session")
def log_spiral():
    grid = NullGrid.from_bounds((0.1, 0.4), (0.1, 0.4), 129)
    return zoo.thimc_cylinder(zoo.CurveSpec("log_spiral", 1.0, 0.3), grid)


@pytest.fixture(scope="session")
def trig_revolution():
    prof = zoo.solve_painleve_profile("trig")
    imm, data = zoo.revolution_surface(prof.spec)
    return prof, imm, data


@pytest.fixture(scope="session")
def bscroll():
    grid = NullGrid.from_bounds((1.0, 2.0), (-1.5, -0.75), 129)
    return zoo.b_scroll(lambda s: 0.0 * s, lambda s: 1.0 / s, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if report.when == "call" and marker in report.nodeid:
        name = report.nodeid.split(marker, 1)[1]
        ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split("_", 1)[0])):
        num, label = name.split("_", 1)
        status = "PASS" if ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2} {status}  {label.replace('_', ' ')}")
