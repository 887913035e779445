import numpy as np
import pytest
from hypothesis import given, strategies as st

from twomicro.bump import Trig
from twomicro.calculus import (HSweep, commutator, commutator_order, convert_order,
                               convert_quantization, moyal_order, offdiag_decay, order_regression)
from twomicro.errors import CapError, DataError, MismatchError
from twomicro.grid import Grid
from twomicro.quantize import multiplier, quantize
from twomicro.symbols import make_bump_symbol

HS = [2.0 ** -j for j in range(3, 8)]


def small_sweep(ext):
    return HSweep.geometric(3, 6, xi_extent=ext)


def test_regression_examples():
    r = order_regression([(h, h ** 2) for h in HS])
    assert r.slope == pytest.approx(2.0, abs=1e-10)
    assert len(r.step_slopes) == len(HS) - 1
    assert order_regression([(h, 3.0) for h in HS]).slope == pytest.approx(0.0, abs=1e-12)
    z = order_regression([(h, 0.0) for h in HS])
    assert z.no_mass and np.isnan(z.slope)
    with pytest.raises(DataError):
        order_regression([(h, h) for h in HS[:3]])
    with pytest.raises(DataError):
        order_regression([(h, h) for h in HS[::-1]])


@given(p=st.floats(-3, 6), c=st.floats(1e-3, 1e3))
def test_regression_recovers_power_laws(p, c):
    r = order_regression([(h, c * h ** p) for h in HS])
    assert r.slope == pytest.approx(p, abs=1e-9)
    assert all(s == pytest.approx(p, abs=1e-9) for s in r.step_slopes)
    assert r.residual < 1e-9


def test_regression_serializes():
    r = order_regression([(h, h) for h in HS])
    assert '"slope"' in r.to_json()
    assert order_regression([(h, 0.0) for h in HS]).to_dict()["slope"] is None


def test_hsweep_validation_and_grids():
    with pytest.raises(DataError):
        HSweep((0.1, 0.05, 0.02))
    with pytest.raises(DataError):
        HSweep((0.1, 0.2, 0.05, 0.01))
    s = HSweep.geometric(3, 9, xi_extent=1.0, band=4)
    assert s.hs[0] == 0.125 and len(s.hs) == 7
    assert s.grid_for(0.125).N == (2 * (8 + 8),)
    with pytest.raises(CapError):
        HSweep.geometric(3, 9, n=2).grid_for(2.0 ** -9)


def test_conversion_identity_for_x_independent():
    a = make_bump_symbol(1, 0.2, 0.7)
    for N in range(3):
        b = convert_quantization(a, "left", "right", N)
        x, xi = np.array([0.3]), np.array([0.1])
        assert complex(b(x, xi, 0.1)) == pytest.approx(complex(a(x, xi, 0.1)))


def test_conversion_first_correction():
    a = make_bump_symbol(1, 0.2, 0.7, xtrig=[Trig.of({1: 1.0, -2: 0.5})])
    b = convert_quantization(a, "left", "right", 1)
    x, xi, h = np.array([0.3]), np.array([0.1]), 0.05
    corr = complex(b(x, xi, h) - a(x, xi, h))
    assert corr == pytest.approx(1j * h * complex(a.deriv((1,), (1,))(x, xi, h)))
    assert b.remainder_drop == 2
    same = convert_quantization(a, "weyl", "weyl", 2)
    assert complex(same(x, xi, h)) == pytest.approx(complex(a(x, xi, h)))


def test_conversion_is_exact_for_linear_symbols():
    # a = f(x) xi: the series stops after one term, Opl(a) = Opr(a + i h f')
    from twomicro.bump import Poly
    from twomicro.symbols import separable
    a = separable([Trig.of({1: 1.0, -1: 0.5})], [Poly((0.0, 1.0))])
    g = Grid((16,))
    A = quantize(a, 0.1, g, "left").matrix
    B = quantize(convert_quantization(a, "left", "right", 1), 0.1, g, "right").matrix
    # pairs that wrap around the grid see different frequencies under left and right
    k = g.flat_freqs()[:, 0]
    inner = np.abs(k) < 7
    assert np.max(np.abs((A - B)[np.ix_(inner, inner)])) < 1e-12


def test_commutator_trivial_cases():
    a = make_bump_symbol(1, 0.2, 0.7, xtrig=[Trig.of({1: 1.0})])
    A = quantize(a, 0.1, Grid((16,)), "weyl")
    assert np.max(np.abs(commutator(A, A).matrix)) == 0
    g = Grid((16,))
    P, Q = multiplier(g, 0.1, lambda xi: xi[..., 0]), multiplier(g, 0.1, lambda xi: xi[..., 0] ** 3)
    assert np.max(np.abs(commutator(P, Q).matrix)) == 0
    with pytest.raises(MismatchError):
        commutator(A, quantize(a, 0.2, Grid((16,)), "weyl"))


def pair():
    a = make_bump_symbol(1, 0.3, 1.5, xtrig=[Trig.of({0: 1, 1: 0.4, -1: 0.4})])
    b = make_bump_symbol(1, 0.1, 1.6, xtrig=[Trig.of({0: 0.5, 1: 0.3j, -1: -0.3j})])
    return a, b


def test_moyal_remainder_orders_increase():
    a, b = pair()
    res = moyal_order(a, b, (0, 1), small_sweep(2.0), method="svd")
    s0, s1 = (r.regression.slope for r in res)
    assert s0 > 0.7 and s1 > s0 + 0.7


def test_conversion_orders_increase():
    a, _ = pair()
    res = convert_order(a, "left", "right", (0, 1), small_sweep(2.0), method="svd")
    s0, s1 = (r.regression.slope for r in res)
    assert s0 > 0.7 and s1 > s0 + 0.7


def test_commutator_weyl_beats_left():
    a, b = pair()
    w = commutator_order(a, b, "weyl", small_sweep(2.0), method="svd").regression.slope
    l = commutator_order(a, b, "left", small_sweep(2.0), method="svd").regression.slope
    assert w > l + 0.5 and l > 0.5


def test_offdiag_decay_fast():
    a = make_bump_symbol(1, 0.0, 3.0, xtrig=[Trig.of({0: 1.0})])
    r = offdiag_decay(a, 0.5, sweep=HSweep.geometric(3, 7, xi_extent=3.1))
    assert r.regression.slope > 2.0
    assert list(r.csv_rows())[0][0] == "offdiag-decay:sep=0.5"
