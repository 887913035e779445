from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twomicro.errors import AliasError, RationalityError
from twomicro.grid import Grid, fourier, l2_norm
from twomicro.integrable import (SNPoint, apply_flat_hamiltonian, cofactor_det, flat_hamiltonian,
                                 flat_model, h1_flow, h2_flow, isoenergetic, linear_model,
                                 modulate_to_zero_section,
                                 orbit_closure, uk_family, uk_quasimode, parse_rational,
                                 propagation_check, superposition_family, wkb_modes,
                                 wkb_state)
from twomicro.microlocal import wf2_scan
from twomicro.quantize import apply
from twomicro.symbols import subprincipal_of

F = Fraction
angles = st.floats(0, 2 * np.pi)
times = st.floats(-3, 3)


def test_flat_determinant_exact():
    M = isoenergetic(flat_model([F(1), F(0)]))
    assert M.exact and M.det == F(-8) and M.nondegenerate
    assert M.omega == [2, 0] and M.hessian == [[2, 0], [0, 2]]
    assert M.to_dict()["det"] == "-8"


@given(a=st.fractions(-5, 5), b=st.fractions(-5, 5), n=st.integers(1, 3))
def test_flat_determinant_closed_form(a, b, n):
    xi0 = ([a, b] + [F(0)] * n)[:n]
    M = isoenergetic(flat_model(xi0))
    assert M.det == -(2 ** (n + 1)) * sum(v * v for v in xi0)


def test_determinant_scaling():
    base = isoenergetic(flat_model([F(1), F(0)])).det
    assert isoenergetic(flat_model([F(2), F(0)])).det == 4 * base
    # cubic in a common scaling of omega and the Hessian
    s = isoenergetic(flat_model([F(1), F(0)]))
    Om = [[2 * v for v in row] for row in s.Omega]
    assert cofactor_det(Om) == 8 * s.det


def test_linear_model_degenerate():
    M = isoenergetic(linear_model([F(1), F(1)]))
    assert M.det == 0 and not M.nondegenerate
    fl = isoenergetic(flat_model([1.0, 0.0]))
    assert not fl.exact and fl.det == pytest.approx(-8.0)


def test_parse_rational():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational([1, 3]) == F(1, 3)
    assert parse_rational(2) == F(2)
    with pytest.raises(RationalityError):
        parse_rational(0.5)


def test_orbit_closure_cases():
    full = orbit_closure(isoenergetic(flat_model([F(1), F(0)])), [F(0), F(1)])
    assert full.kind == "full torus" and full.dimension == 2
    lin = orbit_closure(isoenergetic(linear_model([F(1), F(1)])), [F(0), F(1)])
    assert lin.kind == "subtorus" and lin.dimension == 1
    par = orbit_closure(isoenergetic(flat_model([F(1), F(0)])), [F(1), F(0)])
    assert par.dimension == 1
    pt = orbit_closure(isoenergetic(linear_model([F(0), F(0)])), [F(0), F(1)])
    assert pt.kind == "point"


def test_orbit_closure_rationality():
    fl = isoenergetic(flat_model([1.0, 0.0]))
    with pytest.raises(RationalityError):
        orbit_closure(fl, [0, 1])
    got = orbit_closure(fl, [0.0, 1.0], heuristic=True)
    assert got.heuristic and got.dimension == 2


@given(th=st.tuples(angles, angles), t=times, s=times)
def test_flow_group_law(th, t, s):
    q = SNPoint(th, (0.6, 0.8))
    w, H = [2.0, 0.0], [[2.0, 0.0], [0.0, 2.0]]
    a = h1_flow(h1_flow(q, t, w), s, w)
    b = h1_flow(q, t + s, w)
    assert np.allclose(np.exp(1j * np.array(a.theta)), np.exp(1j * np.array(b.theta)))
    c = h2_flow(h1_flow(q, t, w), s, H)
    d = h1_flow(h2_flow(q, s, H), t, w)
    assert np.allclose(np.exp(1j * np.array(c.theta)), np.exp(1j * np.array(d.theta)))
    assert h1_flow(q, 0.0, w) == SNPoint(np.mod(th, 2 * np.pi), (0.6, 0.8))


def test_flat_h2_moves_along_ihat():
    q = SNPoint((0.0, 0.0), (0.0, 1.0))
    r = h2_flow(q, 0.5, [[2, 0], [0, 2]])
    assert np.allclose(r.theta, (0.0, 1.0)) and r.ihat == q.ihat


def test_snpoint_validation():
    with pytest.raises(ValueError):
        SNPoint((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        SNPoint((0.0,), (0.0, 1.0))


def test_model_check():
    flat_model([1.0, 0.5]).check(np.random.default_rng(0))
    linear_model([1.0, 2.0]).check(np.random.default_rng(0))


def test_flat_hamiltonian_and_quasimode():
    h, u = uk_quasimode(1)
    assert h == pytest.approx(1 / np.sqrt(2))
    assert l2_norm(u) == pytest.approx(1.0)
    for k in (1, 5, 64):
        h, u = uk_quasimode(k)
        assert l2_norm(apply_flat_hamiltonian(u)) < 1e-10
    h, u = uk_quasimode(2)
    P = flat_hamiltonian(Grid((16, 8)), h)
    assert l2_norm(apply(P, u.densify(Grid((16, 8))))) < 1e-12
    with pytest.raises(ValueError):
        uk_quasimode(0)


def test_subprincipal_of_flat_weyl_symbol():
    p = flat_model([1.0, 0.0]).weyl_symbol((1.0, 0.0))
    x = np.zeros(2)
    assert complex(subprincipal_of(p)(x, np.array([1.0, 0.0]), 0.1)) == 0
    assert complex(p(x, np.array([1.0, 0.0]), 0.1)) == pytest.approx(0.0)


def test_wkb_state_and_modulation():
    g = Grid((16, 16))
    u = wkb_state(g, 0.1, (3, 0), chi=lambda X: 1 + 0.5 * np.cos(X[..., 1]))
    c = fourier(modulate_to_zero_section(u, (3, 0)))
    assert abs(c[(0, 0)] - 1) < 1e-12 and abs(c[(0, 1)] - 0.25) < 1e-12
    with pytest.raises(AliasError):
        wkb_state(g, 0.1, (8, 0))
    s = wkb_modes(0.1, (3, 0), {(0, 1): 2.0})
    assert s.coefficient((3, 1)) == 2.0
    assert modulate_to_zero_section(s, (3, 0)).coefficient((0, 1)) == 2.0


def test_propagation_check_on_scan():
    rep = wf2_scan(uk_family(), order=(1, 0), x_cells=4, angle_cells=8)
    M = isoenergetic(flat_model([1.0, 0.0]))
    chk = propagation_check(rep, rep.detected, M.omega, M.hessian, np.linspace(0, 3, 8))
    assert chk.invariant and chk.cells == len(rep.detected) > 0
    # a lone cell is not invariant under the flows
    one = {sorted(rep.detected)[0]}
    assert not propagation_check(rep, one, M.omega, M.hessian, [1.0]).invariant


def test_propagation_on_superpositions():
    fam = superposition_family((8, 16, 32, 64), [(1, 0), (0, -2)])
    for h, u in fam.members:
        assert l2_norm(u) == pytest.approx(np.sqrt(3))
    rep = wf2_scan(fam, order=(1, 0), x_cells=4, angle_cells=8)
    M = isoenergetic(flat_model([1.0, 0.0]))
    for cells in (rep.detected, rep.mass):
        assert propagation_check(rep, cells, M.omega, M.hessian, np.linspace(0.375, 3, 8)).invariant
