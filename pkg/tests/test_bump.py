import numpy as np
import pytest
from hypothesis import given, strategies as st

from twomicro.bump import Bump, Const, Poly, Trig, UProduct, bump, bump_derivatives

pts = st.floats(-0.95, 0.95)


def test_bump_values():
    assert bump(0.0) == pytest.approx(1.0)
    assert bump(1.0) == 0 and bump(-1.5) == 0
    assert bump(0.5) == pytest.approx(np.exp(1 - 1 / 0.75))


@given(t=pts, k=st.integers(0, 4))
def test_bump_derivatives_match_finite_differences(t, k):
    e = 1e-5
    d = bump_derivatives(np.array([t - e, t, t + e]), k + 1)
    fd = (d[k][2] - d[k][0]) / (2 * e)
    assert fd == pytest.approx(d[k + 1][1], rel=1e-4, abs=1e-3 * 10 ** k)


@given(c=st.floats(-3, 3), w=st.floats(0.2, 2), t=st.floats(-6, 6))
def test_periodic_bump_wraps(c, w, t):
    b = Bump(c, w, periodic=True)
    assert b(t) == pytest.approx(b(t + 2 * np.pi), abs=1e-12)


@given(t=st.floats(-3, 3))
def test_trig_derivative(t):
    f = Trig.of({0: 1.0, 2: 0.5j, -1: 0.3})
    e = 1e-6
    assert (f(t + e) - f(t - e)) / (2 * e) == pytest.approx(complex(f.d(1)(t)), abs=1e-6)
    assert f.bandwidth == 2
    assert complex(Trig.cos(1)(0.0)) == pytest.approx(1.0)
    assert complex(Trig.sin(1)(np.pi / 2)) == pytest.approx(1.0)


@given(t=st.floats(-0.9, 0.9), k=st.integers(0, 3))
def test_product_rule(t, k):
    f, g = Bump(0.1, 1.2), Trig.of({1: 1.0})
    p = UProduct(f, g)
    e = 1e-5
    lhs = (complex(p.d(k)(t + e)) - complex(p.d(k)(t - e))) / (2 * e)
    assert lhs == pytest.approx(complex(p.d(k + 1)(t)), rel=1e-4, abs=1e-4)


def test_poly_and_const():
    p = Poly((1.0, 0.0, 3.0))
    assert complex(p(2.0)) == 13
    assert complex(p.d(1)(2.0)) == 12
    assert complex(p.d(3)(1.0)) == 0
    assert complex(Const(2.5)(7.0)) == 2.5
