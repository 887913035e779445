import numpy as np
import pytest
from hypothesis import given, strategies as st

from twomicro.bump import Trig
from twomicro.errors import DepthError, ExpansionError, ExtrapolationError, SpecError
from twomicro.symbols import (FunctionSymbol, LocalizerSpec, SymbolOrder, blowup_coords, constant,
                              make_bump_symbol, make_localizer, moyal_expand, moyal_terms,
                              poisson_bracket, principal_symbol_at, sample_order_ratio,
                              subprincipal_of, with_expansion, xi_monomial)


def spec2(order=(0, 0), **kw):
    d = dict(x0=(1.0, 2.0), ihat0=(0.0, 1.0), delta=1.0, eps=1.0, xwidth=1.5, anglewidth=0.8,
             order=SymbolOrder(*order))
    d.update(kw)
    return LocalizerSpec(**d)


def fd(sym, x, xi, h, alpha, beta, e=1e-5):
    """Central difference of one first derivative."""
    x, xi = np.array(x, float), np.array(xi, float)
    if any(alpha):
        d = e * np.array(alpha, float)
        return (sym(x + d, xi, h) - sym(x - d, xi, h)) / (2 * e)
    d = e * np.array(beta, float)
    return (sym(x, xi + d, h) - sym(x, xi - d, h)) / (2 * e)


@given(x=st.tuples(st.floats(0, 6.2), st.floats(0, 6.2)),
       r=st.floats(0.15, 0.8), th=st.floats(1.0, 2.1), ax=st.integers(0, 1))
def test_localizer_derivatives_match_fd(x, r, th, ax):
    loc = make_localizer(spec2(order=(1, 0)))
    xi = (r * np.cos(th), r * np.sin(th))
    h = 0.05
    e = tuple(int(i == ax) for i in range(2))
    got = complex(loc.deriv(None, e)(np.array(x), np.array(xi), h))
    assert got == pytest.approx(complex(fd(loc, x, xi, h, (0, 0), e)), rel=1e-4, abs=1e-6)
    got = complex(loc.deriv(e, None)(np.array(x), np.array(xi), h))
    assert got == pytest.approx(complex(fd(loc, x, xi, h, e, (0, 0))), rel=1e-4, abs=1e-6)


def test_localizer_1d_derivative():
    spec = LocalizerSpec(x0=(1.0,), ihat0=(1.0,), delta=1.0, eps=1.0, xwidth=1.0, anglewidth=1.0,
                         order=SymbolOrder(2, 1))
    loc = make_localizer(spec)
    for xi in (0.2, 0.5, 0.7):
        got = complex(loc.deriv(None, (1,))(np.array([1.1]), np.array([xi]), 0.05))
        assert got == pytest.approx(complex(fd(loc, [1.1], [xi], 0.05, (0,), (1,))), rel=1e-4)
    assert complex(loc(np.array([1.0]), np.array([-0.5]), 0.05)) == 0


def test_localizer_support():
    loc = make_localizer(spec2())
    h = 0.01
    x = np.array([1.0, 2.0])
    assert abs(loc(x, np.array([0.0, 0.5]), h)) > 0.5
    assert loc(x, np.array([0.0, -0.5]), h) == 0  # wrong direction
    assert loc(x, np.array([0.0, 1.5]), h) == 0  # beyond delta
    assert loc(x, np.array([0.0, 0.005]), h) == 0  # sigma > eps
    assert loc(x, np.array([0.0, 0.0]), h) == 0
    assert loc(np.array([4.0, 2.0]), np.array([0.0, 0.5]), h) == 0


def test_localizer_spec_validation_and_roundtrip():
    with pytest.raises(SpecError):
        make_localizer(spec2(delta=0.0))
    with pytest.raises(SpecError):
        make_localizer(spec2(ihat0=(0.0, 0.0)))
    with pytest.raises(SpecError):
        make_localizer(spec2(ihat0=(1.0,)))
    s = spec2(order=(1, -1))
    assert LocalizerSpec.from_dict(s.to_dict()) == s


@given(m=st.integers(0, 3), l=st.integers(-2, 2), seed=st.integers(0, 1000))
def test_localizer_respects_its_order(m, l, seed):
    loc = make_localizer(spec2(order=(m, l)))
    ratio = sample_order_ratio(loc, 0.02, np.random.default_rng(seed), 400)
    assert ratio <= 1.0 + 1e-12


def test_principal_symbol_examples():
    loc = make_localizer(spec2())
    assert principal_symbol_at(loc, (1.0, 2.0), 0.5 * 1e-9 + 1e-12, (0.0, 1.0)) == pytest.approx(1.0, abs=1e-6)
    b = make_bump_symbol(2, 0.0, 2.0)
    # h b measured with m = 0 vanishes at the side face
    hb = b.times_h(1.0).with_order(SymbolOrder(0, 0))
    assert principal_symbol_at(hb, (0.0, 0.0), 0.3, (1.0, 0.0)) == pytest.approx(0, abs=1e-6)
    # declared as order (-1, -1) its principal part is b itself
    assert principal_symbol_at(b.times_h(1.0), (0.0, 0.0), 0.3, (1.0, 0.0)) == pytest.approx(
        complex(b(np.zeros(2), np.array([0.3, 0.0]), 0.1)), rel=1e-6)
    # a semiclassical symbol pulled back to the blow-up does not see ihat at rho -> 0
    v1 = principal_symbol_at(b, (0.0, 0.0), 1e-8, (1.0, 0.0))
    v2 = principal_symbol_at(b, (0.0, 0.0), 1e-8, (0.0, 1.0))
    assert v1 == pytest.approx(v2, abs=1e-6)


def test_principal_symbol_extrapolation_failure():
    wild = FunctionSymbol(1, lambda x, xi, h: np.sin(1.0 / h) + 0 * xi[..., 0])
    with pytest.raises(ExtrapolationError):
        principal_symbol_at(wild, (0.0,), 1.0, (1.0,))


def test_blowup_coords():
    c = blowup_coords([1.0, 0.5], 0.01, [1.0, 0.0])
    assert c.rho == pytest.approx(0.5) and c.sigma == pytest.approx(0.02)
    assert np.allclose(c.ihat, [0.0, 1.0]) and np.allclose(c.Xi, [0.0, 50.0])
    assert blowup_coords([0.0, 0.0], 0.1).degenerate


def test_depth_error_and_fallback():
    f = FunctionSymbol(1, lambda x, xi, h: np.cos(x[..., 0]) * xi[..., 0] ** 2)
    with pytest.raises(DepthError):
        f.deriv((1,), None)
    g = f.with_fallback()
    val = complex(g.deriv(None, (1,))(np.array([0.0]), np.array([1.5]), 0.1))
    assert val == pytest.approx(3.0, rel=1e-6)


def test_poisson_bracket_basic():
    a = xi_monomial(1, 0)
    b = make_bump_symbol(1, 0.0, 3.0, xtrig=[Trig.of({1: 1.0})])
    # {xi, b} = d_x b
    x, xi = np.array([0.7]), np.array([0.4])
    assert complex(poisson_bracket(a, b)(x, xi, 0.1)) == pytest.approx(complex(b.deriv((1,), None)(x, xi, 0.1)))
    c = make_bump_symbol(1, 0.2, 1.0)
    assert abs(complex(poisson_bracket(a, c)(x, xi, 0.1))) < 1e-15


def test_moyal_expand_structure():
    a = make_bump_symbol(1, 0.3, 2.0, xtrig=[Trig.of({0: 1, 1: 0.4})])
    b = make_bump_symbol(1, 0.1, 2.1, xtrig=[Trig.of({1: 0.3j})])
    x, xi, h = np.array([0.4]), np.array([0.2]), 0.1
    assert complex(moyal_expand(a, b, 0)(x, xi, h)) == pytest.approx(complex(a(x, xi, h) * b(x, xi, h)))
    t1 = sum(complex(t(x, xi, h)) for t in moyal_terms(a, b, 1))
    pb = complex(poisson_bracket(a, b)(x, xi, h))
    assert t1 == pytest.approx(h / 2j * pb)


def test_subprincipal():
    p = with_expansion(xi_monomial(1, 0), constant(1, 0.25))
    assert complex(subprincipal_of(p)(np.array([0.0]), np.array([0.0]), 0.1)) == 0.25
    assert complex(subprincipal_of(xi_monomial(1, 0))(np.array([0.0]), np.array([3.0]), 0.1)) == 0
    with pytest.raises(ExpansionError):
        subprincipal_of(FunctionSymbol(1, lambda x, xi, h: h + 0 * xi[..., 0]))


def test_symbol_arithmetic():
    a = make_bump_symbol(1, 0.0, 1.0)
    x, xi = np.array([0.0]), np.array([0.3])
    v = complex(a(x, xi, 0.1))
    assert complex((a + a)(x, xi, 0.1)) == pytest.approx(2 * v)
    assert complex((a - a)(x, xi, 0.1)) == 0
    assert complex((3 * a)(x, xi, 0.1)) == pytest.approx(3 * v)
    assert complex((a * a)(x, xi, 0.1)) == pytest.approx(v * v)
    assert complex(a.times_h(2, 2.0)(x, xi, 0.1)) == pytest.approx(0.02 * v)
    assert complex((1j * a).conj()(x, xi, 0.1)) == pytest.approx(-1j * v)
