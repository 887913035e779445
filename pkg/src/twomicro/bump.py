"""Univariate building blocks with exact derivatives of every order.

The compactly supported bump is psi(t) = exp(1 - 1/(1 - t^2)) on |t| < 1,
psi(0) = 1.  Its derivatives follow from psi' = g' psi with
g = 1 - 1/(1 - t^2), whose derivatives have the closed form

    g^(j)(t) = -j!/2 * ((1 - t)^-(j+1) + (-1)^j (1 + t)^-(j+1)),  j >= 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

# psi underflows to zero once 1 - t^2 < ~1.4e-3; derivatives are zero there too
_EDGE = 1.5e-3


def bump_derivatives(t, order: int) -> list[np.ndarray]:
    """[psi(t), psi'(t), ..., psi^(order)(t)]."""
    t = np.asarray(t, dtype=float)
    out = [np.zeros_like(t) for _ in range(order + 1)]
    inside = (1.0 - t * t) > _EDGE
    if not np.any(inside):
        return out
    s = t[inside]
    psi = [np.exp(1.0 - 1.0 / (1.0 - s * s))]
    g = [None] + [
        -0.5 * factorial(j) * ((1.0 - s) ** -(j + 1) + (-1) ** j * (1.0 + s) ** -(j + 1))
        for j in range(1, order + 1)
    ]
    for k in range(1, order + 1):
        psi.append(sum(comb(k - 1, j) * g[j + 1] * psi[k - 1 - j] for j in range(k)))
    for k in range(order + 1):
        out[k][inside] = psi[k]
    return out


def bump(t) -> np.ndarray:
    return bump_derivatives(t, 0)[0]


def wrap(d):
    """Signed periodic displacement in [-pi, pi)."""
    return (np.asarray(d, dtype=float) + np.pi) % (2 * np.pi) - np.pi


class Univariate:
    """A smooth function of one real variable that can differentiate itself."""

    h_free = True

    def __call__(self, t) -> np.ndarray:
        raise NotImplementedError

    def d(self, k: int = 1) -> "Univariate":
        raise NotImplementedError

    def __mul__(self, other: "Univariate") -> "Univariate":
        return UProduct(self, other)


@dataclass(frozen=True, eq=False)
class Bump(Univariate):
    """psi((t - center)/width) differentiated ``k`` times; ``periodic`` wraps t - center."""

    center: float = 0.0
    width: float = 1.0
    periodic: bool = False
    k: int = 0

    def __call__(self, t):
        d = np.asarray(t, dtype=float) - self.center
        if self.periodic:
            d = wrap(d)
        return bump_derivatives(d / self.width, self.k)[self.k] / self.width ** self.k

    def d(self, k=1):
        return Bump(self.center, self.width, self.periodic, self.k + k)

    @property
    def radius(self) -> float:
        return self.width


@dataclass(frozen=True, eq=False)
class Trig(Univariate):
    """Trigonometric polynomial sum_m c_m e^{i m t}."""

    coeffs: tuple  # ((m, c), ...)

    @classmethod
    def of(cls, mapping: dict) -> "Trig":
        return cls(tuple(sorted((int(m), complex(c)) for m, c in mapping.items() if c != 0)))

    @classmethod
    def cos(cls, m: int, amp: complex = 1.0) -> "Trig":
        if m == 0:
            return cls.of({0: amp})
        return cls.of({m: amp / 2, -m: amp / 2})

    @classmethod
    def sin(cls, m: int, amp: complex = 1.0) -> "Trig":
        return cls.of({m: amp / 2j, -m: -amp / 2j})

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for m, c in self.coeffs:
            out = out + c * np.exp(1j * m * t)
        return out

    def d(self, k=1):
        return Trig(tuple((m, c * (1j * m) ** k) for m, c in self.coeffs if (m != 0 or k == 0)))

    @property
    def bandwidth(self) -> int:
        return max((abs(m) for m, _ in self.coeffs), default=0)


@dataclass(frozen=True, eq=False)
class Poly(Univariate):
    """Polynomial with coefficients in increasing degree."""

    coeffs: tuple

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.polynomial.polynomial.polyval(t, np.asarray(self.coeffs, dtype=complex)) + 0j * t

    def d(self, k=1):
        c = np.polynomial.polynomial.polyder(np.asarray(self.coeffs, dtype=complex), k)
        return Poly(tuple(c.tolist()) if c.size else (0.0,))


def Const(c=1.0) -> Poly:
    return Poly((complex(c),))


@dataclass(frozen=True, eq=False)
class UProduct(Univariate):
    f: Univariate
    g: Univariate

    def __call__(self, t):
        return self.f(t) * self.g(t)

    def d(self, k=1):
        terms = [(comb(k, j), self.f.d(j) if j else self.f, self.g.d(k - j) if k - j else self.g)
                 for j in range(k + 1)]
        return USum(tuple((c, UProduct(a, b)) for c, a, b in terms))


@dataclass(frozen=True, eq=False)
class USum(Univariate):
    terms: tuple  # ((coef, Univariate), ...)

    def __call__(self, t):
        return sum(c * f(t) for c, f in self.terms)

    def d(self, k=1):
        return USum(tuple((c, f.d(k)) for c, f in self.terms))
