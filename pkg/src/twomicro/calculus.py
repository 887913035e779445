"""Calculus experiments: order regression over h-sweeps, change of quantization,
composition remainders, commutators and off-diagonal kernel decay.

Every order claim is measured as a fitted exponent of a norm against h.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import factorial, prod
from typing import Callable, Sequence

import numpy as np

from .bump import Trig
from .errors import CapError, DataError, MismatchError
from .grid import Grid
from .quantize import (DENSE_CAP, OperatorRep, QuantizationKind, _kind, kernel_offdiag_decay,
                       operator_norm, quantize)
from .symbols import (LocalizerSpec, Scaled, SumSymbol, Symbol, SymbolOrder, make_bump_symbol,
                      make_localizer, moyal_expand, multi_indices, poisson_bracket,
                      principal_symbol_at)

__all__ = [
    "HSweep", "RegressionResult", "order_regression", "convert_quantization", "commutator",
    "principal_symbol_at", "SweepPoint", "SweepResult", "moyal_order", "convert_order",
    "commutator_order", "norm_scaling", "offdiag_decay", "default_pair",
]

NO_MASS = 1e-13


@dataclass(frozen=True)
class HSweep:
    """Decreasing h values with one grid per h.

    The grid for ``h`` has N = 2 ceil(xi_extent/h + 2 band) points per axis, so
    every frequency the symbols can reach, plus ``band`` modes of x-spectrum on
    either side, fits in the window.
    """

    hs: tuple = tuple(2.0 ** -(3 + j) for j in range(7))
    n: int = 1
    xi_extent: float = 2.0
    band: int = 4
    cap: int = DENSE_CAP
    fixed_N: int | None = None

    def __post_init__(self):
        hs = tuple(float(h) for h in self.hs)
        object.__setattr__(self, "hs", hs)
        if len(hs) < 4:
            raise DataError("an h-sweep needs at least 4 values")
        if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
            raise DataError("h values must be positive and strictly decreasing")

    @classmethod
    def geometric(cls, j0: int = 3, j1: int = 9, **kw) -> "HSweep":
        return cls(tuple(2.0 ** -j for j in range(j0, j1 + 1)), **kw)

    def grid_for(self, h: float) -> Grid:
        if self.fixed_N is not None:
            N = self.fixed_N
        else:
            N = 2 * int(math.ceil(self.xi_extent / h + 2 * self.band))
        if N ** self.n > self.cap:
            raise CapError(f"grid {N}^{self.n} at h={h:g} exceeds the dense cap {self.cap}")
        return Grid.square(self.n, N)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hs"] = list(self.hs)
        return d


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    step_slopes: tuple
    residual: float
    no_mass: bool = False
    hs: tuple = ()
    values: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("slope", "intercept", "residual"):
            if not math.isfinite(d[k]):
                d[k] = None
        d["step_slopes"] = [s if math.isfinite(s) else None for s in self.step_slopes]
        d["hs"], d["values"] = list(self.hs), list(self.values)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def order_regression(data: Sequence[tuple[float, float]]) -> RegressionResult:
    """Least-squares fit of log value against log h.

    All values below 1e-13 gives a ``no_mass`` result with NaN slope.  Isolated
    zeros are clamped to 1e-300 so the fit stays finite and strongly positive.
    """
    data = [(float(h), float(v)) for h, v in data]
    if len(data) < 4:
        raise DataError(f"order regression needs at least 4 points, got {len(data)}")
    hs = np.array([h for h, _ in data])
    vs = np.array([v for _, v in data])
    if np.any(hs <= 0) or np.any(np.diff(hs) >= 0):
        raise DataError("h values must be positive and strictly decreasing")
    if np.any(vs < 0) or not np.all(np.isfinite(vs)):
        raise DataError("values must be finite and nonnegative")
    if np.all(vs < NO_MASS):
        nan = float("nan")
        return RegressionResult(nan, nan, tuple([nan] * (len(hs) - 1)), nan, True,
                                tuple(hs.tolist()), tuple(vs.tolist()))
    lh = np.log(hs)
    lv = np.log(np.maximum(vs, 1e-300))
    A = np.vstack([lh, np.ones_like(lh)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, lv, rcond=None)
    res = float(np.sqrt(np.mean((A @ np.array([slope, icpt]) - lv) ** 2)))
    steps = tuple((np.diff(lv) / np.diff(lh)).tolist())
    return RegressionResult(float(slope), float(icpt), steps, res, False,
                            tuple(hs.tolist()), tuple(vs.tolist()))


# -- symbol-level operations ---------------------------------------------------

def convert_quantization(a: Symbol, frm, to, N: int) -> Symbol:
    """Symbol b with Op_to(b) = Op_frm(a) + O(h^{N+1}).

    b = sum_{|alpha| <= N} (i h (t_to - t_frm))^{|alpha|} / alpha! d_xi^alpha d_x^alpha a,
    where t is 0, 1/2, 1 for left, Weyl, right.
    """
    frm, to = _kind(frm), _kind(to)
    dt = to.t - frm.t
    terms = [a]
    if dt != 0:
        for s in range(1, N + 1):
            for alpha in multi_indices(a.n, s):
                c = (1j * dt) ** s / prod(map(factorial, alpha))
                terms.append(Scaled(a.deriv(alpha, alpha), c, s))
    out = SumSymbol(terms, a.order)
    out.remainder_drop = N + 1
    return out


def commutator(A: OperatorRep, B: OperatorRep) -> OperatorRep:
    """AB - BA as a dense operator."""
    if A.grid != B.grid or not math.isclose(A.h, B.h, rel_tol=1e-14):
        raise MismatchError("commutator of operators on different spaces")
    return A @ B - B @ A


# -- sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    h: float
    N: int
    value: float


@dataclass
class SweepResult:
    experiment: str
    label: str
    points: list = field(default_factory=list)
    regression: RegressionResult | None = None

    def fit(self) -> RegressionResult:
        self.regression = order_regression([(p.h, p.value) for p in self.points])
        return self.regression

    def csv_rows(self):
        for p in self.points:
            yield (f"{self.experiment}:{self.label}", repr(p.h), repr(p.value))

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "label": self.label,
                "points": [asdict(p) for p in self.points],
                "regression": None if self.regression is None else self.regression.to_dict()}


def _norm(A: OperatorRep | np.ndarray, method: str, seed: int) -> float:
    if isinstance(A, np.ndarray):
        A = OperatorRep(QuantizationKind.LEFT, None, 1.0, Grid((A.shape[0],)), "dense", A)
    return operator_norm(A, method=method, seed=seed)


def _pmap(fn, items, threads: int = 1) -> list:
    """Ordered map; sweep points are independent so they may run concurrently."""
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _sweep(name: str, label: str, sweep: HSweep, value: Callable[[float, Grid], float],
           threads: int = 1) -> SweepResult:
    def point(h):
        g = sweep.grid_for(h)
        return SweepPoint(h, g.N[0], float(value(h, g)))

    out = SweepResult(name, label, _pmap(point, sweep.hs, threads))
    out.fit()
    return out


def default_pair(n: int = 1) -> tuple[Symbol, Symbol]:
    """Two fixed smooth compactly supported symbols with x-bandwidth <= 2."""
    a = make_bump_symbol(n, 0.3, 2.0, xtrig=[Trig.of({0: 1, 1: 0.4, -1: 0.4})] * n)
    b = make_bump_symbol(n, 0.1, 2.1, xtrig=[Trig.of({0: 0.5, 1: 0.3j, -1: -0.3j})] * n)
    return a, b


def _extent(*syms: Symbol) -> float:
    ext = 0.0
    for s in syms:
        sup = s.support
        if sup is None or sup.xi0 is None:
            raise ValueError("sweep symbols need a declared support")
        r = sup.xi_radius if sup.xi_radius is not None else sup.rho_max
        ext = max(ext, float(np.max(np.abs(sup.xi0))) + r)
    return ext + 0.1


def _default_sweep(syms, sweep: HSweep | None, n: int) -> HSweep:
    return sweep if sweep is not None else HSweep.geometric(3, 9, n=n, xi_extent=_extent(*syms))


def moyal_order(a: Symbol, b: Symbol, Ns=(0, 1, 2), sweep: HSweep | None = None,
                method: str = "power", seed: int = 0, threads: int = 1) -> list[SweepResult]:
    """||Opw(a) Opw(b) - Opw(a #_N b)|| for each truncation depth N."""
    sweep = _default_sweep((a, b), sweep, a.n)
    cs = {N: moyal_expand(a, b, N) for N in Ns}

    def point(h):
        g = sweep.grid_for(h)
        AB = quantize(a, h, g).matrix @ quantize(b, h, g).matrix
        return [SweepPoint(h, g.N[0], _norm(AB - quantize(cs[N], h, g).matrix, method, seed))
                for N in Ns]

    rows = _pmap(point, sweep.hs, threads)
    out = []
    for i, N in enumerate(Ns):
        r = SweepResult("moyal-order", f"N={N}", [row[i] for row in rows])
        r.fit()
        out.append(r)
    return out


def convert_order(a: Symbol, frm="left", to="right", Ns=(0, 1, 2), sweep: HSweep | None = None,
                  method: str = "power", seed: int = 0, threads: int = 1) -> list[SweepResult]:
    """||Op_frm(a) - Op_to(convert(a, N))|| for each N."""
    sweep = _default_sweep((a,), sweep, a.n)
    bs = {N: convert_quantization(a, frm, to, N) for N in Ns}

    def point(h):
        g = sweep.grid_for(h)
        A = quantize(a, h, g, frm).matrix
        return [SweepPoint(h, g.N[0], _norm(A - quantize(bs[N], h, g, to).matrix, method, seed))
                for N in Ns]

    rows = _pmap(point, sweep.hs, threads)
    out = []
    for i, N in enumerate(Ns):
        r = SweepResult("convert-order", f"{_kind(frm).value}->{_kind(to).value},N={N}",
                        [row[i] for row in rows])
        r.fit()
        out.append(r)
    return out


def commutator_order(a: Symbol, b: Symbol, kind="weyl", sweep: HSweep | None = None,
                     method: str = "power", seed: int = 0, threads: int = 1) -> SweepResult:
    """||(i/h)[Op(a), Op(b)] - Op({a, b})||."""
    sweep = _default_sweep((a, b), sweep, a.n)
    pb = poisson_bracket(a, b)

    def value(h, g):
        A, B = quantize(a, h, g, kind), quantize(b, h, g, kind)
        C = commutator(A, B).matrix
        R = (1j / h) * C - quantize(pb, h, g, kind).matrix
        return _norm(R, method, seed)

    return _sweep("commutator-order", _kind(kind).value, sweep, value, threads)


def norm_scaling(spec: LocalizerSpec, kind="weyl", sweep: HSweep | None = None,
                 method: str = "power", seed: int = 0, threads: int = 1) -> SweepResult:
    """h^m ||Op(a)|| for a localizer of order (m, l); bounded when l = m."""
    loc = make_localizer(spec)
    if sweep is None:
        ext = float(np.max(np.abs(loc.xi0))) + spec.delta + 0.1
        sweep = HSweep.geometric(3, 9, n=spec.n, xi_extent=ext)
    m = spec.order.m

    def value(h, g):
        return h ** m * _norm(quantize(loc, h, g, kind, check_alias=False), method, seed)

    return _sweep("norm-scaling", f"m={m},l={spec.order.l}", sweep, value, threads)


def offdiag_decay(a: Symbol, separation: float = 0.5, kind="left",
                  sweep: HSweep | None = None, threads: int = 1) -> SweepResult:
    """max |kernel(x, y)| over pairs at distance > ``separation``."""
    sweep = sweep if sweep is not None else HSweep.geometric(3, 8, n=a.n, xi_extent=_extent(a))

    def value(h, g):
        return kernel_offdiag_decay(quantize(a, h, g, kind), separation)

    return _sweep("offdiag-decay", f"sep={separation}", sweep, value, threads)
