import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twomicro.calculus import order_regression
from twomicro.errors import DataError, GeneratorError, MismatchError, ResolutionError
from twomicro.grid import SparseModeFunction
from twomicro.integrable import uk_family, wkb_family
from twomicro.microlocal import (SemiclassicalFamily, classify, iterated_regularity_profile,
                                 snap_center, wf2_scan, wf_decay_order)
from twomicro.symbols import LocalizerSpec, SymbolOrder, xi_monomial

HS = [2.0 ** -j for j in range(4, 8)]


def up_spec(order=(0, 0), x0=(0.0, 0.0)):
    return LocalizerSpec(x0=x0, ihat0=(0.0, 1.0), delta=1.0, eps=1.0, xwidth=4.0,
                         anglewidth=1.2, order=SymbolOrder(*order), xi0=(1.0, 0.0))


def test_family_validation():
    u = SparseModeFunction.from_dict({(1, 0): 1.0}, 0.1)
    with pytest.raises(DataError):
        SemiclassicalFamily(((0.1, u),) * 3)
    mem = [(h, SparseModeFunction.from_dict({(1, 0): 1.0}, h)) for h in HS]
    with pytest.raises(DataError):
        SemiclassicalFamily(tuple(mem[::-1]))
    with pytest.raises(MismatchError):
        SemiclassicalFamily(tuple(mem[:3]) + ((HS[3], u),))
    with pytest.raises(DataError):
        SemiclassicalFamily(tuple(mem)).center(0)


def test_snap_center():
    c, r = snap_center((1.0, 0.03), 0.1)
    assert np.allclose(c, (1.0, 0.0)) and np.allclose(r, (0.0, 0.03))


def test_classify():
    hs = HS
    assert classify(order_regression([(h, 0.0) for h in hs])) == "no_mass"
    assert classify(order_regression([(h, 1.0) for h in hs])) == "mass"
    assert classify(order_regression([(h, h ** -0.5) for h in hs])) == "detected"


def test_quasimode_has_bounded_mass_upward():
    r = wf_decay_order(uk_family(), up_spec())
    assert not r.no_mass and abs(r.slope) < 0.15


def test_order_shifts_slope():
    # each unit of the first order index multiplies by rho/h ~ k ~ h^(-1/2)
    r0 = wf_decay_order(uk_family(), up_spec())
    r1 = wf_decay_order(uk_family(), up_spec((1, 0)))
    assert r1.slope == pytest.approx(r0.slope - 0.5, abs=0.05)


@settings(max_examples=10)
@given(s=st.floats(-1.5, 2.0))
def test_scale_covariance(s):
    fam = uk_family()
    base = wf_decay_order(fam, up_spec()).slope
    assert wf_decay_order(fam.scaled(s), up_spec()).slope == pytest.approx(base + s, abs=1e-9)


def test_zero_family_has_no_mass():
    fam = uk_family()
    zero = SemiclassicalFamily(tuple((h, 0 * u) for h, u in fam.members), "zero", fam.centers)
    assert wf_decay_order(zero, up_spec()).no_mass


def test_wrong_direction_has_no_mass():
    spec = LocalizerSpec(x0=(0.0, 0.0), ihat0=(0.0, -1.0), delta=1.0, eps=1.0, xwidth=4.0,
                         anglewidth=1.2, order=SymbolOrder(0, 0), xi0=(1.0, 0.0))
    assert wf_decay_order(uk_family(), spec).no_mass


def small_scan(fam, order=(0, 0), **kw):
    return wf2_scan(fam, order=order, x_cells=2, angle_cells=8, **kw)


def test_scan_structure_and_determinism(tmp_path):
    rep = small_scan(uk_family())
    assert len(rep.cells) == 4 * 8
    up = rep.locate((0.0, 0.0), (0.0, 1.0))
    assert up[1] == 2 and up in rep.mass
    for c in rep.cells:
        ang = np.arccos(np.clip(np.dot(c.ihat, (0.0, 1.0)), -1, 1))
        if ang > np.pi / 4 + 1e-9:
            assert c.status == "no_mass"
    again = small_scan(uk_family())
    assert rep.to_json() == again.to_json()
    d = json.loads(rep.to_json(tmp_path / "r.json"))
    assert len(d["cells"]) == 32 and d["metadata"]["kind"] == "left"
    rep.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "x0,x1,angle,slope,status" and len(lines) == 33


def test_higher_order_scan_detects():
    rep = small_scan(uk_family(), order=(1, 0))
    assert rep.detected and rep.detected <= rep.mass


def test_wkb_control_is_not_detected():
    fam = wkb_family(HS, amplitude={(0, 0): 1.0, (0, 1): 0.3, (1, 0): 0.2j})
    rep = small_scan(fam, order=(4, 0))
    assert not rep.detected


def test_resolution_error():
    with pytest.raises(ResolutionError):
        wf2_scan(uk_family(), x_cells=8, xwidth=0.1)
    with pytest.raises(ResolutionError):
        wf2_scan(uk_family(), angle_cells=16, anglewidth=0.1)


def test_regularity_profile_diverges_for_quasimodes():
    prof = iterated_regularity_profile(uk_family(), [xi_monomial(2, 1)], 3)
    ks = np.array([8, 16, 32, 64])
    for m in range(4):
        assert np.allclose(prof.member_values[m], ks.astype(float) ** m, rtol=1e-8)
    # k^3 against 1/h ~ k^2
    assert prof.divergent and prof.growth_exponent == pytest.approx(1.5, abs=0.01)


def test_regularity_profile_bounded_for_wkb():
    fam = wkb_family(HS, amplitude={(0, 0): 1.0, (0, 1): 0.5, (0, -2): 0.25})
    prof = iterated_regularity_profile(fam, [xi_monomial(2, 1)], 3)
    assert not prof.divergent
    assert prof.profile[2] == pytest.approx(np.sqrt(0.5 ** 2 + 1.0 ** 2))


def test_generator_must_vanish():
    with pytest.raises(GeneratorError):
        iterated_regularity_profile(uk_family(), [xi_monomial(2, 0)], 1)
