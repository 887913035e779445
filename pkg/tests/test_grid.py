import numpy as np
import pytest
from hypothesis import given, strategies as st

from twomicro.errors import AliasError, MismatchError
from twomicro.grid import (FourierCoefficients, Grid, GridFunction, SparseModeFunction, fourier,
                           l2_norm, make_mode, random_field, torus_distance)

even = st.integers(1, 8).map(lambda v: 2 * v)


@given(n=st.integers(1, 3), N=even, seed=st.integers(0, 2**31))
def test_fourier_roundtrip_and_parseval(n, N, seed):
    g = Grid.square(n, N)
    u = random_field(g, 0.5, np.random.default_rng(seed))
    c = fourier(u)
    assert np.isclose(l2_norm(c), l2_norm(u), rtol=1e-12)
    back = fourier(c, "inverse")
    assert np.allclose(back.values, u.values, atol=1e-12)


@given(N=even, k=st.integers(-7, 7))
def test_mode_has_single_coefficient(N, k):
    g = Grid((N,))
    if abs(k) >= N // 2:
        with pytest.raises(AliasError):
            make_mode(g, [k], 0.1)
        return
    c = fourier(make_mode(g, [k], 0.1))
    assert abs(c[(k,)] - 1) < 1e-12
    assert abs(l2_norm(c) - 1) < 1e-12


def test_nyquist_rejected():
    g = Grid((8, 8))
    with pytest.raises(AliasError):
        make_mode(g, [4, 0], 0.5)
    with pytest.raises(AliasError):
        g.freq_index([5, 0])
    assert g.freq_index([-4, 3]) == (0, 7)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((7,))
    with pytest.raises(ValueError):
        Grid(())
    assert Grid.square(2, 4).shape == (4, 4)
    assert Grid((4, 6)).size == 24
    assert Grid((4,)).points().shape == (4, 1)


def test_gridfunction_is_read_only_and_checks_h():
    g = Grid((4,))
    u = GridFunction(g, np.ones(4), 0.5)
    with pytest.raises(ValueError):
        u.values[0] = 2
    with pytest.raises(ValueError):
        GridFunction(g, np.ones(4), 0.0)
    with pytest.raises(MismatchError):
        u + GridFunction(g, np.ones(4), 0.25)
    assert np.allclose((2 * u - u).values, 1)
    assert u.inner(u) == pytest.approx(1.0)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5),
                          st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)),
                min_size=1, max_size=8))
def test_sparse_accumulate_and_densify(entries):
    ks = np.array([[a, b] for a, b, _ in entries])
    cs = np.array([c for *_, c in entries])
    u = SparseModeFunction.accumulate(ks, cs, 0.1)
    g = Grid((12, 12))
    x = g.flat_points()
    direct = np.exp(1j * x @ ks.T.astype(float)) @ cs
    assert np.allclose(u.evaluate(x), direct, atol=1e-10)
    assert np.allclose(u.densify(g).values.ravel(), direct, atol=1e-10)
    assert l2_norm(u) == pytest.approx(l2_norm(u.densify(g)), rel=1e-10, abs=1e-12)


def test_sparse_rejects_duplicates_and_shifts():
    with pytest.raises(ValueError):
        SparseModeFunction(np.array([[1], [1]]), np.array([1, 2]), 0.1)
    u = SparseModeFunction.from_dict({(1, 2): 3.0}, 0.1)
    v = u.shifted((2, -2))
    assert v.coefficient((3, 0)) == 3.0 and v.coefficient((1, 2)) == 0
    assert (u + u).coefficient((1, 2)) == 6.0


def test_band_limited_random_field():
    g = Grid((16,))
    u = random_field(g, 0.5, np.random.default_rng(1), band=3)
    c = fourier(u).coeffs
    k = g.freqs()[..., 0]
    assert np.all(np.abs(c[np.abs(k) > 3]) < 1e-12)


def test_torus_distance_wraps():
    assert np.allclose(torus_distance(np.array([2 * np.pi - 0.1, 0.2])), [-0.1, 0.2])


def test_csv_dump(tmp_path):
    g = Grid((4,))
    make_mode(g, [1], 0.5).to_csv(tmp_path / "u.csv")
    FourierCoefficients(g, np.arange(4), 0.5).to_csv(tmp_path / "c.csv")
    SparseModeFunction.from_dict({(1,): 1.0}, 0.5).to_csv(tmp_path / "s.csv")
    assert (tmp_path / "u.csv").read_text().splitlines()[0] == "index,re,im"
    assert len((tmp_path / "c.csv").read_text().splitlines()) == 5
