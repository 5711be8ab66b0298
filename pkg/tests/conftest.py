import numpy as np
import pytest
import sympy as sp
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mesocosserat.forms import AnalyticSpace, Form, VectorField, basis, sample_points

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

coefficient = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
wavenumber = st.integers(min_value=-2, max_value=2)


@st.composite
def trig_expr(draw, space):
    """Small smooth trigonometric polynomial in (t, x, y[, z])."""
    terms = draw(st.integers(min_value=1, max_value=2))
    out = sp.Integer(0)
    for _ in range(terms):
        c = draw(coefficient)
        ks = [draw(wavenumber) for _ in range(space.dim)]
        m = draw(st.integers(min_value=0, max_value=2))
        phase = draw(st.sampled_from([0, 1, 2]))
        arg = sum(k * x for k, x in zip(ks, space.coords)) + m * space.t + phase
        out = out + sp.Float(round(c, 3)) * sp.sin(arg)
    return out


@st.composite
def scalar_form(draw, space, degree):
    comps = {((), b): draw(trig_expr(space)) for b in basis(space.dim, degree)}
    return Form(degree, "scalar", space, comps)


@st.composite
def vector_field(draw, space):
    return VectorField(space, tuple(draw(trig_expr(space)) for _ in range(space.dim)))


def sup(form, t=0.3, n=5):
    """Sup norm of an analytic form on an n^dim interior sample set."""
    return form.sup_norm(t, sample_points(form.dim, n))


def value(expr, space, t, *xs):
    """Numeric value of a sympy coefficient at a single point."""
    pts = np.array([[x] for x in xs], dtype=float)
    return float(space.evaluate(expr, t, pts)[0])


@pytest.fixture
def plane():
    return AnalyticSpace(2)


@pytest.fixture
def space3():
    return AnalyticSpace(3)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
