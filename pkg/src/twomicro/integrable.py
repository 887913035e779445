"""Integrable models on the flat torus in action-angle form.

On T^n the action-angle chart is the identity: theta = x and I = xi - xi0.
Exact rational arithmetic (``fractions.Fraction``) is supported wherever a
yes/no answer depends on exact cancellation: the isoenergetic determinant and
the closure of the joint boundary flows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import numpy as np

from .bump import Const, Poly
from .errors import AliasError, RationalityError
from .grid import Grid, GridFunction, SparseModeFunction
from .microlocal import SemiclassicalFamily, WavefrontReport
from .quantize import OperatorRep, multiplier
from .symbols import Separable, SumSymbol, Symbol, SymbolOrder, constant, with_expansion

DET_TOL = 1e-10


# -- models -----------------------------------------------------------------------

@dataclass(frozen=True)
class ActionAngleModel:
    """p(I) with its gradient omega(I) and Hessian omega_ij(I).

    Evaluators accept sequences of floats or of Fractions; for Fractions the
    built-in models return exact values.
    """

    n: int
    p: Callable
    grad: Callable
    hess: Callable
    name: str = ""
    exact_rational: bool = False
    mu: float = 0.0  # constant subprincipal term
    params: dict = field(default_factory=dict)

    def check(self, rng: np.random.Generator, count: int = 8) -> None:
        """Hessian symmetric and gradient consistent with p by central differences."""
        step = 1e-5
        for _ in range(count):
            I = rng.uniform(-0.5, 0.5, self.n)
            H = np.asarray(self.hess(I), dtype=float)
            if np.max(np.abs(H - H.T)) > 1e-12:
                raise ValueError("Hessian is not symmetric")
            g = np.asarray(self.grad(I), dtype=float)
            fd = np.array([(self.p(I + step * e) - self.p(I - step * e)) / (2 * step)
                           for e in np.eye(self.n)])
            if np.max(np.abs(fd - g)) > 1e-6:
                raise ValueError("gradient does not match p")

    def weyl_symbol(self, xi0) -> Symbol:
        """p(xi - xi0) as a Weyl symbol with subprincipal part mu."""
        if self.name != "flat":
            raise NotImplementedError("phase-space symbol available for the flat model only")
        E = self.params["E"]
        terms = [Separable([Const(1.0)] * self.n,
                           [Poly((0.0, 0.0, 1.0)) if b == a else Const(1.0) for b in range(self.n)])
                 for a in range(self.n)]
        p = SumSymbol(terms + [constant(self.n, -E)], SymbolOrder(0, 0))
        return with_expansion(p, constant(self.n, self.mu))


def _vec(v):
    return list(v)


def flat_model(xi0: Sequence, E=1) -> ActionAngleModel:
    """p = |xi|^2 - E with xi = xi0 + I."""
    xi0 = _vec(xi0)
    n = len(xi0)
    exact = all(isinstance(v, Rational) for v in xi0) and isinstance(E, Rational)

    def p(I):
        return sum((a + b) * (a + b) for a, b in zip(xi0, I)) - E

    def grad(I):
        return [2 * (a + b) for a, b in zip(xi0, I)]

    def hess(I):
        two, zero = (Fraction(2), Fraction(0)) if exact else (2.0, 0.0)
        return [[two if i == j else zero for j in range(n)] for i in range(n)]

    return ActionAngleModel(n, p, grad, hess, "flat", exact, 0.0, {"xi0": xi0, "E": E})


def linear_model(omega: Sequence) -> ActionAngleModel:
    """p = omega . I (zero Hessian)."""
    omega = _vec(omega)
    n = len(omega)
    exact = all(isinstance(v, Rational) for v in omega)
    zero = Fraction(0) if exact else 0.0

    def p(I):
        return sum(w * i for w, i in zip(omega, I))

    return ActionAngleModel(n, p, lambda I: list(omega), lambda I: [[zero] * n for _ in range(n)],
                            "linear", exact, 0.0, {"omega": omega})


def parse_rational(v):
    """'p/q', [p, q], int or Fraction -> Fraction; floats are rejected."""
    if isinstance(v, Rational):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, int) for t in v):
        return Fraction(v[0], v[1])
    raise RationalityError(f"exact rational expected, got {v!r}")


# -- isoenergetic matrix ------------------------------------------------------------

@dataclass(frozen=True)
class IsoenergeticMatrix:
    """[[omega_ij, omega_i], [omega_j, 0]] and its determinant."""

    Omega: tuple
    det: object
    exact: bool

    @property
    def n(self) -> int:
        return len(self.Omega) - 1

    @property
    def nondegenerate(self) -> bool:
        if self.exact:
            return self.det != 0
        return abs(self.det) > DET_TOL

    @property
    def omega(self) -> list:
        return [row[-1] for row in self.Omega[:-1]]

    @property
    def hessian(self) -> list:
        return [list(row[:-1]) for row in self.Omega[:-1]]

    def to_dict(self) -> dict:
        s = str if self.exact else float
        return {"Omega": [[s(v) for v in row] for row in self.Omega], "det": s(self.det),
                "exact": self.exact, "nondegenerate": self.nondegenerate}


def cofactor_det(M: Sequence[Sequence]):
    """Determinant by Laplace expansion along the first row (exact for Fractions)."""
    k = len(M)
    if k == 1:
        return M[0][0]
    total = 0
    for j in range(k):
        if M[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        total += (-1) ** j * M[0][j] * cofactor_det(minor)
    return total


def isoenergetic(model: ActionAngleModel, I0: Sequence | None = None) -> IsoenergeticMatrix:
    n = model.n
    if I0 is None:
        I0 = [Fraction(0) if model.exact_rational else 0.0] * n
    w = list(model.grad(I0))
    H = [list(r) for r in model.hess(I0)]
    zero = Fraction(0) if model.exact_rational else 0.0
    Om = tuple(tuple(H[i] + [w[i]]) for i in range(n)) + (tuple(w + [zero]),)
    if model.exact_rational:
        return IsoenergeticMatrix(Om, Fraction(cofactor_det([list(r) for r in Om])), True)
    return IsoenergeticMatrix(Om, float(np.linalg.det(np.array(Om, dtype=float))), False)


# -- flows on the spherical normal bundle ------------------------------------------

@dataclass(frozen=True)
class SNPoint:
    theta: tuple
    ihat: tuple

    def __post_init__(self):
        th = tuple(float(v) for v in np.atleast_1d(self.theta))
        ih = tuple(float(v) for v in np.atleast_1d(self.ihat))
        if len(th) != len(ih):
            raise ValueError("theta and ihat dimensions differ")
        if abs(math.hypot(*ih) - 1.0) > 1e-12:
            raise ValueError("ihat must be a unit vector")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "ihat", ih)


def _translate(q: SNPoint, v: np.ndarray) -> SNPoint:
    return SNPoint(tuple(np.mod(np.asarray(q.theta) + v, 2 * np.pi).tolist()), q.ihat)


def h1_flow(q: SNPoint, t: float, omega) -> SNPoint:
    """theta -> theta + t omega."""
    return _translate(q, t * np.asarray(omega, dtype=float))


def h2_flow(q: SNPoint, t: float, hess) -> SNPoint:
    """theta_j -> theta_j + t sum_i omega_ij ihat_i."""
    H = np.asarray(hess, dtype=float)
    return _translate(q, t * (np.asarray(q.ihat) @ H))


# -- orbit closure ------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitClosure:
    dimension: int
    n: int
    directions: tuple
    heuristic: bool = False

    @property
    def kind(self) -> str:
        if self.dimension == self.n:
            return "full torus"
        if self.dimension == 0:
            return "point"
        return "subtorus"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "n": self.n,
                "directions": [[str(v) for v in d] for d in self.directions],
                "heuristic": self.heuristic}


def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over Q by exact Gaussian elimination."""
    M = [list(map(Fraction, r)) for r in rows]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def _as_rational(v, heuristic: bool):
    if isinstance(v, Rational):
        return Fraction(v)
    if heuristic:
        return Fraction(float(v)).limit_denominator(10 ** 4)
    raise RationalityError(f"orbit closure needs exact rationals, got {v!r}")


def orbit_closure(Omega: IsoenergeticMatrix, ihat: Sequence, heuristic: bool = False) -> OrbitClosure:
    """Closure of the joint H1/H2 orbit through a point with normal direction ``ihat``.

    For rational data the closure is the subtorus spanned by the directions
    omega and sum_i omega_ij ihat_i, so its dimension is their rank over Q.
    """
    if not Omega.exact and not heuristic:
        raise RationalityError("orbit closure needs an exact isoenergetic matrix")
    n = Omega.n
    w = [_as_rational(v, heuristic) for v in Omega.omega]
    H = [[_as_rational(v, heuristic) for v in row] for row in Omega.hessian]
    ih = [_as_rational(v, heuristic) for v in ihat]
    d2 = [sum(H[i][j] * ih[i] for i in range(n)) for j in range(n)]
    dirs = tuple(tuple(d) for d in (w, d2) if any(v != 0 for v in d))
    dim = rational_rank(dirs) if dirs else 0
    return OrbitClosure(dim, n, dirs, heuristic)


# -- operators and families ---------------------------------------------------------

def flat_hamiltonian(grid: Grid, h: float, E: float = 1.0) -> OperatorRep:
    """h^2 |k|^2 - E as a diagonal Fourier multiplier."""
    return multiplier(grid, h, lambda xi: np.sum(xi * xi, axis=-1) - E, kind="weyl")


def apply_flat_hamiltonian(u: SparseModeFunction, E: float = 1.0) -> SparseModeFunction:
    """Exact action on a mode sum: e^{ik.x} -> (h^2 |k|^2 - E) e^{ik.x}."""
    k = u.ks.astype(float)
    return SparseModeFunction(u.ks, u.cs * (u.h ** 2 * np.sum(k * k, axis=1) - E), u.h)


def uk_quasimode(k: int) -> tuple[float, SparseModeFunction]:
    """u_k = e^{i(k^2 x1 + k x2)} at h_k = 1/(k sqrt(1 + k^2))."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be a positive integer")
    h = 1.0 / (k * math.sqrt(1.0 + k * k))
    return h, SparseModeFunction(np.array([[k * k, k]]), np.array([1.0 + 0j]), h)


def uk_family(ks: Sequence[int] = (8, 16, 32, 64), xi0=(1.0, 0.0)) -> SemiclassicalFamily:
    mem = [uk_quasimode(k) for k in sorted(ks)]
    return SemiclassicalFamily(tuple(mem), "uk", tuple([tuple(xi0)] * len(mem)))


def superposition_family(ks: Sequence[int], shifts: Sequence[Sequence[int]],
                         xi0=(1.0, 0.0)) -> SemiclassicalFamily:
    """Members u_k + sum_s e^{i s.x} u_k sharing h_k (finite superpositions near u_k)."""
    mem = []
    for k in sorted(ks):
        h, u = uk_quasimode(k)
        for s in shifts:
            u = u + uk_quasimode(k)[1].shifted(s)
        mem.append((h, u))
    return SemiclassicalFamily(tuple(mem), "uk-superposition", tuple([tuple(xi0)] * len(mem)))


def wkb_state(grid: Grid, h: float, k0: Sequence[int], chi: Callable | None = None) -> GridFunction:
    """chi(x) e^{i k0.x} on ``grid``; ``chi`` maps points (..., n) to values."""
    k0 = np.asarray(k0, dtype=int)
    if not grid.representable(k0):
        raise AliasError(f"phase frequency {k0.tolist()} not representable on {grid.N}")
    X = grid.points()
    amp = np.ones(grid.shape) if chi is None else np.asarray(chi(X))
    return GridFunction(grid, amp * np.exp(1j * X @ k0.astype(float)), h)


def wkb_modes(h: float, k0: Sequence[int], amplitude: dict | None = None) -> SparseModeFunction:
    """Band-limited amplitude sum_m c_m e^{i m.x} times e^{i k0.x}, exactly."""
    amplitude = amplitude or {(0,) * len(k0): 1.0}
    return SparseModeFunction.from_dict(amplitude, h).shifted(k0)


def wkb_family(hs: Sequence[float], xi_star=(1.0, 0.0), amplitude: dict | None = None) -> SemiclassicalFamily:
    """Lagrangian control family: amplitude times mode round(xi*/h), centered on the lattice."""
    mem, centers = [], []
    for h in hs:
        k0 = np.round(np.asarray(xi_star) / h).astype(int)
        mem.append((h, wkb_modes(h, k0, amplitude)))
        centers.append(tuple((h * k0).tolist()))
    return SemiclassicalFamily(tuple(mem), "wkb", tuple(centers))


def modulate_to_zero_section(u, k0: Sequence[int]):
    """u -> e^{-i k0.x} u, exact on both representations."""
    k0 = np.asarray(k0, dtype=int)
    if isinstance(u, SparseModeFunction):
        return u.shifted(-k0)
    if isinstance(u, GridFunction):
        phase = np.exp(-1j * u.grid.points() @ k0.astype(float))
        return GridFunction(u.grid, u.values * phase, u.h)
    raise TypeError(f"cannot modulate {type(u).__name__}")


# -- propagation consistency ---------------------------------------------------------

@dataclass(frozen=True)
class PropagationCheck:
    cells: int
    h1_invariant: bool
    h2_invariant: bool
    failures: tuple

    @property
    def invariant(self) -> bool:
        return self.h1_invariant and self.h2_invariant

    def to_dict(self) -> dict:
        return {"cells": self.cells, "h1_invariant": self.h1_invariant,
                "h2_invariant": self.h2_invariant, "failures": [list(map(str, f)) for f in self.failures]}


def propagation_check(report: WavefrontReport, cells: set, omega, hess,
                      times: Sequence[float]) -> PropagationCheck:
    """Is ``cells`` mapped into itself by both flows at every sampled time?"""
    fails = []
    ok = {"h1": True, "h2": True}
    for key in sorted(cells):
        c = report.cell(*key)
        q = SNPoint(c.x_center, c.ihat)
        for t in times:
            for name, img in (("h1", h1_flow(q, t, omega)), ("h2", h2_flow(q, t, hess))):
                dst = report.locate(img.theta, img.ihat)
                if dst not in cells:
                    ok[name] = False
                    fails.append((name, key, t, dst))
    return PropagationCheck(len(cells), ok["h1"], ok["h2"], tuple(fails))
