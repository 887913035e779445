"""Bi-graded symbols on the blown-up total symbol space and their algebra.

A symbol is an evaluator ``a(x, xi, h)`` (vectorized: ``x`` and ``xi`` have
trailing axis of length n and broadcast against each other) together with
its bi-order (m, l): size (|xi - xi0|/h)^m |xi - xi0|^-l near the corner.
Every library constructor supplies exact mixed partials through
``deriv(alpha, beta)``; a central-difference fallback exists but is opt-in.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, prod
from typing import Callable, Sequence

import numpy as np

from .bump import Bump, Const, Poly, Trig, Univariate, bump, wrap
from .errors import DepthError, ExpansionError, ExtrapolationError, SpecError

FD_STEP = 1e-5


@dataclass(frozen=True)
class SymbolOrder:
    m: float = 0.0
    l: float = 0.0

    def __add__(self, other: "SymbolOrder") -> "SymbolOrder":
        return SymbolOrder(self.m + other.m, self.l + other.l)

    def shift(self, dm: float = 0.0, dl: float = 0.0) -> "SymbolOrder":
        return SymbolOrder(self.m + dm, self.l + dl)


def _sup(a: SymbolOrder, b: SymbolOrder) -> SymbolOrder:
    return SymbolOrder(max(a.m, b.m), max(a.l, b.l))


@dataclass(frozen=True)
class Support:
    """Box containing the support.  ``None`` fields are unconstrained."""

    xi0: tuple | None = None
    x0: tuple | None = None
    xwidth: float | None = None
    xi_radius: float | None = None  # sup-norm radius around xi0
    rho_max: float | None = None
    sigma_max: float | None = None
    ihat0: tuple | None = None
    anglewidth: float | None = None

    def contains(self, x, xi, h) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        ok = np.ones(shape, dtype=bool)
        if self.x0 is not None and self.xwidth is not None:
            ok &= np.all(np.abs(wrap(x - np.asarray(self.x0))) < self.xwidth, axis=-1)
        if self.xi0 is None:
            return ok
        eta = xi - np.asarray(self.xi0)
        if self.xi_radius is not None:
            ok &= np.all(np.abs(eta) < self.xi_radius, axis=-1)
        rho = np.linalg.norm(eta, axis=-1)
        if self.rho_max is not None:
            ok &= (rho > 0) & (rho < self.rho_max)
        if self.sigma_max is not None:
            with np.errstate(divide="ignore"):
                ok &= h / np.where(rho > 0, rho, 0.0) < self.sigma_max
        if self.ihat0 is not None and self.anglewidth is not None:
            ok &= _angle(eta, np.asarray(self.ihat0, dtype=float)) < self.anglewidth
        return ok


def _angle(eta: np.ndarray, ihat0: np.ndarray) -> np.ndarray:
    """Angle between eta/|eta| and the unit vector ihat0 (pi at eta = 0)."""
    rho = np.linalg.norm(eta, axis=-1)
    if eta.shape[-1] == 2:
        c = eta[..., 0] * ihat0[0] + eta[..., 1] * ihat0[1]
        s = ihat0[0] * eta[..., 1] - ihat0[1] * eta[..., 0]
        ang = np.abs(np.arctan2(s, c))
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.clip((eta @ ihat0) / rho, -1.0, 1.0)
        ang = np.arccos(cosang)
    return np.where(rho > 0, ang, np.pi)


def _mi(alpha, n: int) -> tuple[int, ...]:
    if alpha is None:
        return (0,) * n
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if len(alpha) != n or min(alpha) < 0:
        raise ValueError(f"bad multi-index {alpha} for n={n}")
    return alpha


def multi_indices(n: int, total: int):
    """All multi-indices in N^n with |alpha| == total."""
    for c in itertools.combinations_with_replacement(range(n), total):
        a = [0] * n
        for j in c:
            a[j] += 1
        yield tuple(a)


class Symbol:
    """Base class; subclasses implement ``_eval`` and ``_deriv``."""

    n: int
    order: SymbolOrder = SymbolOrder()
    support: Support | None = None
    fd_fallback: bool = False

    def __call__(self, x, xi, h) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return np.asarray(self._eval(x, xi, float(h)), dtype=complex)

    def _eval(self, x, xi, h):
        raise NotImplementedError

    def _deriv(self, alpha, beta) -> "Symbol | None":
        return None

    @property
    def h_free(self) -> bool:
        return False

    @property
    def expansion(self):
        """Declared (a0, a1) with a = a0 + h a1 + O(h^2), or None."""
        if self.h_free:
            return (self, ZeroSymbol(self.n))
        return None

    def deriv(self, alpha=None, beta=None) -> "Symbol":
        """The symbol d_x^alpha d_xi^beta a."""
        alpha, beta = _mi(alpha, self.n), _mi(beta, self.n)
        if not any(alpha) and not any(beta):
            return self
        cache = self.__dict__.setdefault("_dcache", {})
        key = (alpha, beta)
        if key not in cache:
            d = self._deriv(alpha, beta)
            if d is None:
                if not self.fd_fallback:
                    raise DepthError(f"{type(self).__name__} has no analytic derivative {key}")
                d = FiniteDifferenceSymbol(self, alpha, beta)
            cache[key] = d
        return cache[key]

    def with_fallback(self, enabled: bool = True) -> "Symbol":
        out = Wrapped(self)
        out.fd_fallback = enabled
        return out

    def with_order(self, order: SymbolOrder) -> "Symbol":
        out = Wrapped(self)
        out.order = order
        return out

    def __add__(self, other):
        if not isinstance(other, Symbol):
            other = constant(self.n, other)
        return SumSymbol((self, other))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Symbol):
            other = constant(self.n, other)
        return SumSymbol((self, Scaled(other, -1.0)))

    def __neg__(self):
        return Scaled(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, Symbol):
            return ProductSymbol(self, other)
        return Scaled(self, complex(other))

    def __rmul__(self, other):
        return Scaled(self, complex(other))

    def conj(self) -> "Symbol":
        return Conj(self)

    def times_h(self, p: float = 1.0, c: complex = 1.0) -> "Symbol":
        """c h^p a."""
        return Scaled(self, c, p)


class Wrapped(Symbol):
    def __init__(self, inner: Symbol):
        self.inner = inner
        self.n = inner.n
        self.order = inner.order
        self.support = inner.support
        self.fd_fallback = inner.fd_fallback

    def _eval(self, x, xi, h):
        return self.inner._eval(x, xi, h)

    def _deriv(self, alpha, beta):
        try:
            return self.inner.deriv(alpha, beta)
        except DepthError:
            return None

    @property
    def h_free(self):
        return self.inner.h_free

    @property
    def expansion(self):
        return self.inner.expansion

    def principal(self, x, rho, ihat):
        if not hasattr(self.inner, "principal"):
            raise NotImplementedError
        return self.inner.principal(x, rho, ihat)


class ZeroSymbol(Symbol):
    def __init__(self, n: int):
        self.n = n

    def _eval(self, x, xi, h):
        return np.zeros(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1]), dtype=complex)

    def _deriv(self, alpha, beta):
        return self

    @property
    def h_free(self):
        return True


class Separable(Symbol):
    """coef * h^hpower * prod_a f_a(x_a) * prod_a g_a(xi_a)."""

    def __init__(self, xfactors: Sequence[Univariate], xifactors: Sequence[Univariate],
                 coef: complex = 1.0, hpower: float = 0.0, order: SymbolOrder | None = None,
                 support: Support | None = None):
        if len(xfactors) != len(xifactors):
            raise ValueError("one x factor and one xi factor per axis")
        self.n = len(xfactors)
        self.xf = tuple(xfactors)
        self.gf = tuple(xifactors)
        self.coef = complex(coef)
        self.hpower = float(hpower)
        self.order = order or SymbolOrder(-self.hpower, -self.hpower)
        self.support = support

    def _eval(self, x, xi, h):
        out = self.coef * h ** self.hpower
        for a in range(self.n):
            out = out * self.xf[a](x[..., a]) * self.gf[a](xi[..., a])
        shape = np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])
        return np.broadcast_to(out, shape)

    def _deriv(self, alpha, beta):
        xf = [f.d(k) if k else f for f, k in zip(self.xf, alpha)]
        gf = [g.d(k) if k else g for g, k in zip(self.gf, beta)]
        return Separable(xf, gf, self.coef, self.hpower,
                         self.order.shift(0, sum(beta)), self.support)

    @property
    def h_free(self):
        return self.hpower == 0


class SumSymbol(Symbol):
    def __init__(self, terms: Sequence[Symbol], order: SymbolOrder | None = None):
        terms = tuple(terms)
        self.n = terms[0].n
        if any(t.n != self.n for t in terms):
            raise ValueError("dimension mismatch in sum")
        self.terms = terms
        o = terms[0].order
        for t in terms[1:]:
            o = _sup(o, t.order)
        self.order = order or o
        self.fd_fallback = any(t.fd_fallback for t in terms)

    def _eval(self, x, xi, h):
        out = self.terms[0]._eval(x, xi, h)
        for t in self.terms[1:]:
            out = out + t._eval(x, xi, h)
        return out

    def _deriv(self, alpha, beta):
        try:
            return SumSymbol([t.deriv(alpha, beta) for t in self.terms],
                             self.order.shift(0, sum(beta)))
        except DepthError:
            return None

    @property
    def h_free(self):
        return all(t.h_free for t in self.terms)

    @property
    def expansion(self):
        parts = [t.expansion for t in self.terms]
        if any(p is None for p in parts):
            return None
        return SumSymbol([p[0] for p in parts]), SumSymbol([p[1] for p in parts])


class Scaled(Symbol):
    """c * h^p * a."""

    def __init__(self, inner: Symbol, c: complex = 1.0, p: float = 0.0):
        self.inner = inner
        self.n = inner.n
        self.c = complex(c)
        self.p = float(p)
        self.order = inner.order.shift(-self.p, -self.p)
        self.support = inner.support
        self.fd_fallback = inner.fd_fallback

    def _eval(self, x, xi, h):
        return self.c * h ** self.p * self.inner._eval(x, xi, h)

    def _deriv(self, alpha, beta):
        try:
            return Scaled(self.inner.deriv(alpha, beta), self.c, self.p)
        except DepthError:
            return None

    @property
    def h_free(self):
        return self.p == 0 and self.inner.h_free

    @property
    def expansion(self):
        inner = self.inner.expansion
        if inner is None:
            return None
        a0, a1 = inner
        if self.p == 0:
            return Scaled(a0, self.c), Scaled(a1, self.c)
        if self.p == 1:
            return ZeroSymbol(self.n), Scaled(a0, self.c)
        if self.p >= 2:
            return ZeroSymbol(self.n), ZeroSymbol(self.n)
        return None


class ProductSymbol(Symbol):
    def __init__(self, a: Symbol, b: Symbol):
        if a.n != b.n:
            raise ValueError("dimension mismatch in product")
        self.a, self.b = a, b
        self.n = a.n
        self.order = a.order + b.order
        self.support = a.support or b.support
        self.fd_fallback = a.fd_fallback or b.fd_fallback

    def _eval(self, x, xi, h):
        return self.a._eval(x, xi, h) * self.b._eval(x, xi, h)

    def _deriv(self, alpha, beta):
        terms = []
        try:
            for g in itertools.product(*[range(k + 1) for k in alpha]):
                for d in itertools.product(*[range(k + 1) for k in beta]):
                    c = prod(comb(a, b) for a, b in zip(alpha, g)) * prod(comb(a, b) for a, b in zip(beta, d))
                    rest_a = tuple(a - b for a, b in zip(alpha, g))
                    rest_b = tuple(a - b for a, b in zip(beta, d))
                    t = ProductSymbol(self.a.deriv(g, d), self.b.deriv(rest_a, rest_b))
                    terms.append(t if c == 1 else Scaled(t, c))
        except DepthError:
            return None
        return SumSymbol(terms, self.order.shift(0, sum(beta)))

    @property
    def h_free(self):
        return self.a.h_free and self.b.h_free

    @property
    def expansion(self):
        ea, eb = self.a.expansion, self.b.expansion
        if ea is None or eb is None:
            return None
        return (ProductSymbol(ea[0], eb[0]),
                SumSymbol([ProductSymbol(ea[0], eb[1]), ProductSymbol(ea[1], eb[0])]))


class Conj(Symbol):
    def __init__(self, inner: Symbol):
        self.inner = inner
        self.n = inner.n
        self.order = inner.order
        self.support = inner.support
        self.fd_fallback = inner.fd_fallback

    def _eval(self, x, xi, h):
        return np.conj(self.inner._eval(x, xi, h))

    def _deriv(self, alpha, beta):
        try:
            return Conj(self.inner.deriv(alpha, beta))
        except DepthError:
            return None

    @property
    def h_free(self):
        return self.inner.h_free

    def principal(self, x, rho, ihat):
        if not hasattr(self.inner, "principal"):
            raise NotImplementedError
        return np.conj(self.inner.principal(x, rho, ihat))


class FunctionSymbol(Symbol):
    """User evaluator with optional derivative table ``derivs(alpha, beta) -> callable``."""

    def __init__(self, n: int, fn: Callable, order: SymbolOrder = SymbolOrder(),
                 derivs: Callable | None = None, support: Support | None = None,
                 h_free: bool = False, expansion=None, fd_fallback: bool = False):
        self.n = n
        self.fn = fn
        self.order = order
        self.derivs = derivs
        self.support = support
        self._h_free = h_free
        self._expansion = expansion
        self.fd_fallback = fd_fallback

    def _eval(self, x, xi, h):
        return self.fn(x, xi, h)

    def _deriv(self, alpha, beta):
        if self.derivs is None:
            return None
        f = self.derivs(alpha, beta)
        if f is None:
            return None
        derivs = self.derivs
        return FunctionSymbol(
            self.n, f, self.order.shift(0, sum(beta)),
            derivs=lambda a2, b2: derivs(tuple(np.add(alpha, a2)), tuple(np.add(beta, b2))),
            support=self.support, h_free=self._h_free, fd_fallback=self.fd_fallback)

    @property
    def h_free(self):
        return self._h_free

    @property
    def expansion(self):
        if self._expansion is not None:
            return self._expansion
        return super().expansion


class FiniteDifferenceSymbol(Symbol):
    """Central differences of order 2, step FD_STEP * scale per coordinate."""

    def __init__(self, base: Symbol, alpha, beta, scale: float = 1.0):
        self.base = base
        self.alpha, self.beta = tuple(alpha), tuple(beta)
        self.n = base.n
        self.step = FD_STEP * scale
        self.order = base.order.shift(0, sum(beta))
        self.support = base.support
        self.fd_fallback = True

    def _eval(self, x, xi, h):
        n = self.n
        orders = list(self.alpha) + list(self.beta)
        stencils = []
        for k in orders:
            stencils.append([((k / 2 - j), (-1) ** j * comb(k, j)) for j in range(k + 1)])
        s = self.step
        total = 0
        for combo in itertools.product(*stencils):
            w = prod(c for _, c in combo)
            dx = np.array([o for o, _ in combo[:n]]) * s
            dxi = np.array([o for o, _ in combo[n:]]) * s
            total = total + w * self.base._eval(x + dx, xi + dxi, h)
        return total / s ** sum(orders)

    def _deriv(self, alpha, beta):
        return FiniteDifferenceSymbol(self.base, np.add(self.alpha, alpha), np.add(self.beta, beta))


def constant(n: int, c: complex = 1.0) -> Separable:
    return Separable([Const(1.0)] * n, [Const(1.0)] * n, coef=c, order=SymbolOrder(0, 0))


def separable(xfactors, xifactors, coef=1.0, order: SymbolOrder | None = None,
              support: Support | None = None) -> Separable:
    return Separable(xfactors, xifactors, coef, order=order or SymbolOrder(0, 0), support=support)


def xi_monomial(n: int, axis: int, shift: float = 0.0) -> Separable:
    """The symbol xi_axis - shift (no cutoff)."""
    gf = [Const(1.0)] * n
    gf[axis] = Poly((-shift, 1.0))
    return Separable([Const(1.0)] * n, gf, order=SymbolOrder(0, -1))


def make_bump_symbol(n: int, xi0, xiwidth: float, x0=None, xwidth: float | None = None,
                     xtrig: Sequence[Trig] | None = None, coef: complex = 1.0) -> Separable:
    """Ordinary compactly supported cutoff prod psi((xi_a - xi0_a)/xiwidth) times an x profile.

    The x profile is a periodic bump around ``x0`` or trigonometric factors ``xtrig``.
    """
    xi0 = np.broadcast_to(np.asarray(xi0, dtype=float), (n,))
    if xiwidth <= 0 or (xwidth is not None and xwidth <= 0):
        raise SpecError("widths must be positive")
    gf = [Bump(float(c), float(xiwidth)) for c in xi0]
    if xtrig is not None:
        xf = list(xtrig)
    elif x0 is not None:
        x0 = np.broadcast_to(np.asarray(x0, dtype=float), (n,))
        xf = [Bump(float(c), float(xwidth), periodic=True) for c in x0]
    else:
        xf = [Const(1.0)] * n
    sup = Support(xi0=tuple(xi0), xi_radius=xiwidth,
                  x0=None if x0 is None or xtrig is not None else tuple(x0),
                  xwidth=xwidth if xtrig is None else None)
    return Separable(xf, gf, coef, order=SymbolOrder(0, 0), support=sup)


# -- blow-up coordinates ------------------------------------------------------

@dataclass(frozen=True)
class BlowupCoords:
    rho: float
    ihat: np.ndarray | None
    sigma: float | None
    Xi: np.ndarray
    degenerate: bool = False


def blowup_coords(xi, h: float, xi0=None) -> BlowupCoords:
    xi = np.asarray(xi, dtype=float)
    xi0 = np.zeros_like(xi) if xi0 is None else np.asarray(xi0, dtype=float)
    if not h > 0:
        raise ValueError("h must be positive")
    eta = xi - xi0
    rho = float(np.linalg.norm(eta))
    if rho < 1e-300:
        return BlowupCoords(0.0, None, None, eta / h, True)
    return BlowupCoords(rho, eta / rho, h / rho, eta / h, False)


# -- second-microlocal localizers --------------------------------------------

@dataclass(frozen=True)
class LocalizerSpec:
    x0: tuple
    ihat0: tuple
    delta: float
    eps: float
    xwidth: float
    anglewidth: float
    order: SymbolOrder = SymbolOrder()
    xi0: tuple | None = None  # blow-up center; zero section by default

    def __post_init__(self):
        x0 = tuple(float(v) for v in np.atleast_1d(self.x0))
        ihat = np.atleast_1d(np.asarray(self.ihat0, dtype=float))
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "ihat0", tuple(ihat.tolist()))
        if self.xi0 is not None:
            object.__setattr__(self, "xi0", tuple(float(v) for v in np.atleast_1d(self.xi0)))
        if isinstance(self.order, (tuple, list)):
            object.__setattr__(self, "order", SymbolOrder(*self.order))

    @property
    def n(self) -> int:
        return len(self.x0)

    @classmethod
    def from_dict(cls, d: dict) -> "LocalizerSpec":
        d = dict(d)
        if "order" in d and not isinstance(d["order"], SymbolOrder):
            o = d["order"]
            d["order"] = SymbolOrder(**o) if isinstance(o, dict) else SymbolOrder(*o)
        return cls(**d)

    def to_dict(self) -> dict:
        return {"x0": list(self.x0), "ihat0": list(self.ihat0), "delta": self.delta,
                "eps": self.eps, "xwidth": self.xwidth, "anglewidth": self.anglewidth,
                "order": {"m": self.order.m, "l": self.order.l},
                "xi0": None if self.xi0 is None else list(self.xi0)}


@lru_cache(maxsize=None)
def _polar_derivative(n: int, m: float, l: float, ihat0: tuple, delta: float, eps: float,
                      aw: float, side: int, beta: tuple):
    """Lambdified d_eta^beta of the xi-part of a localizer (smooth branch only)."""
    import sympy as sp

    h = sp.Symbol("h", positive=True)
    etas = sp.symbols(f"e0:{n}", real=True)

    def psi(t):
        return sp.exp(1 - 1 / (1 - t ** 2))

    if n == 1:
        rho = side * etas[0]
        ang = sp.Integer(0)
        angfac = sp.Integer(1) if side == int(np.sign(ihat0[0])) else psi(sp.pi / aw)
    else:
        c0, s0 = ihat0
        ang = sp.atan2(c0 * etas[1] - s0 * etas[0], c0 * etas[0] + s0 * etas[1])
        rho = sp.sqrt(etas[0] ** 2 + etas[1] ** 2)
        angfac = psi(ang / aw)
    expr = (rho / h) ** sp.nsimplify(m) * rho ** (-sp.nsimplify(l)) * angfac \
        * psi(rho / delta) * psi(h / (rho * eps))
    d = expr
    for j, k in enumerate(beta):
        if k:
            d = sp.diff(d, etas[j], k)
    return sp.lambdify((etas, h), d, modules="numpy", cse=True)


class Localizer(Symbol):
    """(rho/h)^m rho^-l chi(x) phi(angle/aw) psi(rho/delta) psi(sigma/eps)."""

    def __init__(self, spec: LocalizerSpec, alpha=None, beta=None):
        self.spec = spec
        self.n = spec.n
        self.order = spec.order
        self.xi0 = np.zeros(self.n) if spec.xi0 is None else np.asarray(spec.xi0, dtype=float)
        ihat = np.asarray(spec.ihat0, dtype=float)
        self.ihat0 = ihat / np.linalg.norm(ihat)
        self.alpha = _mi(alpha, self.n)
        self.beta = _mi(beta, self.n)
        self.xf = [Bump(c, spec.xwidth, periodic=True, k=k) for c, k in zip(spec.x0, self.alpha)]
        self.support = Support(xi0=tuple(self.xi0), x0=spec.x0, xwidth=spec.xwidth,
                               rho_max=spec.delta, sigma_max=spec.eps,
                               ihat0=tuple(self.ihat0), anglewidth=spec.anglewidth)

    def _xpart(self, x):
        out = 1.0
        for a in range(self.n):
            out = out * self.xf[a](x[..., a])
        return out

    def _radial(self, rho, h):
        s = self.spec
        with np.errstate(divide="ignore", invalid="ignore"):
            pre = (rho / h) ** s.order.m * rho ** (-s.order.l)
        return pre * bump(rho / s.delta) * bump(h / (rho * s.eps))

    def _eval(self, x, xi, h):
        s = self.spec
        eta = xi - self.xi0
        rho = np.linalg.norm(eta, axis=-1)
        ang = _angle(eta, self.ihat0)
        live = (rho > 0) & (rho < s.delta) & (rho * s.eps > h) & (ang < s.anglewidth)
        out = np.zeros(rho.shape, dtype=complex)
        if not any(self.beta):
            if np.any(live):
                r = rho[live]
                val = self._radial(r, h) * bump(ang[live] / s.anglewidth)
                out[live] = val
        else:
            self._polar_fill(out, eta, live, h)
        return out * self._xpart(x)

    def _polar_fill(self, out, eta, live, h):
        s = self.spec
        if self.n > 2:
            raise DepthError("analytic xi-derivatives of localizers require n <= 2")
        e = eta[live]
        if e.size == 0:
            return
        cols = [e[:, j] for j in range(self.n)]
        if self.n == 1:
            for side in (1, -1):
                sel = np.sign(cols[0]) == side
                if not np.any(sel):
                    continue
                f = _polar_derivative(1, s.order.m, s.order.l, tuple(self.ihat0), s.delta, s.eps,
                                      s.anglewidth, side, self.beta)
                vals = out[live]
                vals[sel] = np.broadcast_to(f([cols[0][sel]], h), sel.sum())
                out[live] = vals
        else:
            f = _polar_derivative(2, s.order.m, s.order.l, tuple(self.ihat0), s.delta, s.eps,
                                  s.anglewidth, 0, self.beta)
            out[live] = np.broadcast_to(f(cols, h), e.shape[0])

    def _deriv(self, alpha, beta):
        if any(beta) and self.n > 2:
            return None
        return Localizer(self.spec, np.add(self.alpha, alpha), np.add(self.beta, beta))

    def principal(self, x, rho, ihat):
        """lim_{sigma -> 0} h^m a at (x, rho, ihat); exact from the factored form."""
        if any(self.alpha) or any(self.beta):
            raise NotImplementedError
        s = self.spec
        x = np.asarray(x, dtype=float)
        ihat = np.asarray(ihat, dtype=float)
        rho = np.asarray(rho, dtype=float)
        ang = _angle(ihat, self.ihat0)
        val = rho ** (s.order.m - s.order.l) * bump(rho / s.delta) * bump(ang / s.anglewidth)
        return val * self._xpart(x)


def make_localizer(spec: LocalizerSpec) -> Localizer:
    for name in ("delta", "eps", "xwidth", "anglewidth"):
        if not getattr(spec, name) > 0:
            raise SpecError(f"{name} must be positive, got {getattr(spec, name)}")
    if len(spec.ihat0) != spec.n:
        raise SpecError("ihat0 dimension does not match x0")
    if not np.linalg.norm(spec.ihat0) > 0:
        raise SpecError("ihat0 must be nonzero")
    return Localizer(spec)


# -- symbol algebra -------------------------------------------------------------

def poisson_bracket(a: Symbol, b: Symbol) -> Symbol:
    """{a, b} = sum_j d_xi_j a d_x_j b - d_x_j a d_xi_j b."""
    n = a.n
    terms = []
    for j in range(n):
        e = tuple(int(i == j) for i in range(n))
        terms.append(ProductSymbol(a.deriv(None, e), b.deriv(e, None)))
        terms.append(Scaled(ProductSymbol(a.deriv(e, None), b.deriv(None, e)), -1.0))
    return SumSymbol(terms, (a.order + b.order).shift(-1, 0))


def moyal_terms(a: Symbol, b: Symbol, total: int) -> list[Symbol]:
    """Terms of the Weyl composition series with |alpha + beta| == total."""
    n = a.n
    out = []
    for s in range(total + 1):
        for alpha in multi_indices(n, s):
            for beta in multi_indices(n, total - s):
                coef = (-1) ** s / ((2j) ** total * prod(map(factorial, alpha)) * prod(map(factorial, beta)))
                t = ProductSymbol(a.deriv(alpha, beta), b.deriv(beta, alpha))
                out.append(Scaled(t, coef, total))
    return out


def moyal_expand(a: Symbol, b: Symbol, N: int) -> Symbol:
    """Weyl product a # b truncated to |alpha + beta| <= N."""
    terms = [ProductSymbol(a, b)]
    for total in range(1, N + 1):
        terms.extend(moyal_terms(a, b, total))
    return SumSymbol(terms, a.order + b.order)


def with_expansion(a0: Symbol, a1: Symbol) -> Symbol:
    """The symbol a0 + h a1 carrying its declared h-expansion."""
    s = SumSymbol([a0, Scaled(a1, 1.0, 1.0)], a0.order)
    return _Expanded(s, a0, a1)


class _Expanded(Wrapped):
    def __init__(self, inner, a0, a1):
        super().__init__(inner)
        self._declared = (a0, a1)

    @property
    def expansion(self):
        return self._declared


def subprincipal_of(a: Symbol) -> Symbol:
    """The h^1 coefficient of a declared Weyl-symbol expansion."""
    exp = a.expansion
    if exp is None:
        raise ExpansionError(f"{type(a).__name__} declares no h-expansion")
    return exp[1]


def sample_order_ratio(a: Symbol, h: float, rng: np.random.Generator, count: int = 1000) -> float:
    """max |a| (h/rho)^m rho^l over random points of the declared support box."""
    sup = a.support
    if sup is None or sup.xi0 is None:
        raise SpecError("symbol has no support descriptor")
    n = a.n
    xi0 = np.asarray(sup.xi0)
    x = rng.uniform(0, 2 * np.pi, (count, n))
    if sup.x0 is not None and sup.xwidth is not None:
        x = np.asarray(sup.x0) + rng.uniform(-sup.xwidth, sup.xwidth, (count, n))
    if sup.rho_max is not None:
        lo = h / sup.sigma_max if sup.sigma_max else 0.0
        rho = rng.uniform(lo, sup.rho_max, count)
        d = rng.standard_normal((count, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        xi = xi0 + rho[:, None] * d
    else:
        r = sup.xi_radius or 1.0
        xi = xi0 + rng.uniform(-r, r, (count, n))
    rho = np.linalg.norm(xi - xi0, axis=1)
    vals = np.abs(a(x, xi, h))
    m, l = a.order.m, a.order.l
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(vals > 0, vals * (h / rho) ** m * rho ** l, 0.0)
    return float(np.max(w))


def principal_symbol_at(a: Symbol, x, rho: float, ihat, xi0=None, eps: float = 1.0) -> complex:
    """Side-face value lim_{sigma -> 0} h^m a at (x, xi0 + rho ihat).

    Uses the factored form when the symbol exposes one, otherwise Richardson
    extrapolation over sigma in {1e-3, 5e-4, 2.5e-4} * eps.
    """
    if hasattr(a, "principal"):
        try:
            return complex(np.asarray(a.principal(x, rho, ihat)))
        except NotImplementedError:
            pass
    x = np.asarray(x, dtype=float)
    ihat = np.asarray(ihat, dtype=float)
    xi0 = np.zeros(a.n) if xi0 is None else np.asarray(xi0, dtype=float)
    xi = xi0 + rho * ihat
    m = a.order.m
    sig = np.array([1e-3, 5e-4, 2.5e-4]) * eps
    f = np.array([complex((s * rho) ** m * a(x, xi, s * rho)) for s in sig])
    r1 = 2 * f[1] - f[0]
    r2 = 2 * f[2] - f[1]
    if abs(r2 - r1) > 1e-4:
        raise ExtrapolationError(f"Richardson values {r1} and {r2} differ")
    return complex((4 * r2 - r1) / 3)
