"""Wavefront estimators for semiclassical families.

A point is outside the wavefront set at order k when localized norms
||Op(a) u_h|| are O(h^k).  Both estimators below fit these norms against h
(see :func:`order_regression`): ``wf_decay_order`` for a single ordinary
cutoff, ``wf2_scan`` for a cover of the spherical normal bundle of the
Lagrangian {xi = xi0} by second-microlocal localizers.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calculus import RegressionResult, order_regression
from .errors import DataError, GeneratorError, MismatchError, ResolutionError
from .grid import Grid, GridFunction, SparseModeFunction, l2_norm
from .quantize import QuantizationKind, _kind, apply, apply_symbol_to_modes, localized_norm, quantize
from .symbols import LocalizerSpec, Symbol, SymbolOrder, make_localizer

# slope below which the localized norms are read as unbounded
DETECT_SLOPE = -0.25


@dataclass(frozen=True)
class SemiclassicalFamily:
    """Members (h_j, u_j) with h strictly decreasing, optionally with centers xi0(h_j)."""

    members: tuple
    label: str = ""
    centers: tuple | None = None

    def __post_init__(self):
        mem = tuple((float(h), u) for h, u in self.members)
        object.__setattr__(self, "members", mem)
        if len(mem) < 4:
            raise DataError("a family needs at least 4 members")
        hs = [h for h, _ in mem]
        if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
            raise DataError("member h values must be positive and strictly decreasing")
        for h, u in mem:
            if not isinstance(u, (GridFunction, SparseModeFunction)):
                raise TypeError(f"unsupported member type {type(u).__name__}")
            if not math.isclose(u.h, h, rel_tol=1e-12):
                raise MismatchError(f"member field carries h={u.h}, expected {h}")
        if self.centers is not None:
            c = tuple(tuple(float(v) for v in np.atleast_1d(x)) for x in self.centers)
            if len(c) != len(mem):
                raise DataError("one center per member required")
            object.__setattr__(self, "centers", c)

    @property
    def hs(self) -> list[float]:
        return [h for h, _ in self.members]

    @property
    def n(self) -> int:
        u = self.members[0][1]
        return u.n if isinstance(u, SparseModeFunction) else u.grid.n

    def scaled(self, s: float) -> "SemiclassicalFamily":
        """Every member multiplied by h^s."""
        return SemiclassicalFamily(tuple((h, u * h ** s) for h, u in self.members),
                                   self.label, self.centers)

    def center(self, j: int, default=None) -> np.ndarray:
        if self.centers is not None:
            return np.asarray(self.centers[j])
        if default is None:
            raise DataError("family carries no centers and none was given")
        return np.asarray(default, dtype=float)


def snap_center(xi0, h: float) -> tuple[np.ndarray, np.ndarray | None]:
    """Nearest point of the lattice h Z^n when within h/2 per axis, and the residual."""
    xi0 = np.asarray(xi0, dtype=float)
    snapped = h * np.round(xi0 / h)
    if np.all(np.abs(snapped - xi0) <= h / 2):
        return snapped, xi0 - snapped
    return xi0, None


def _member_norm(a: Symbol, u, kind, amp_grid: Grid | None) -> float:
    if isinstance(u, SparseModeFunction):
        return localized_norm(a, u, kind, amp_grid)
    A = quantize(a, u.h, u.grid, kind, form="lazy")
    return l2_norm(apply(A, u))


def localized_norms(fam: SemiclassicalFamily, a: Symbol | Sequence[Symbol], kind="left",
                    amp_grid: Grid | None = None) -> list[float]:
    """||Op(a_j) u_j|| per member; ``a`` may be one symbol or one per member."""
    syms = list(a) if isinstance(a, (list, tuple)) else [a] * len(fam.members)
    return [_member_norm(s, u, kind, amp_grid) for s, (_, u) in zip(syms, fam.members)]


def wf_decay_order(fam: SemiclassicalFamily, loc: Symbol | LocalizerSpec, kind="left",
                   amp_grid: Grid | None = None) -> RegressionResult:
    """Regression of ||Op(loc) u_h|| against h."""
    a = make_localizer(loc) if isinstance(loc, LocalizerSpec) else loc
    return order_regression(list(zip(fam.hs, localized_norms(fam, a, kind, amp_grid))))


# -- second wavefront scan ----------------------------------------------------------

@dataclass(frozen=True)
class ScanCell:
    x_index: tuple
    angle_index: int
    x_center: tuple
    ihat: tuple
    regression: RegressionResult
    status: str  # "no_mass" | "mass" | "detected"

    @property
    def key(self) -> tuple:
        return (self.x_index, self.angle_index)

    def to_dict(self) -> dict:
        return {"x_index": list(self.x_index), "angle_index": self.angle_index,
                "x_center": list(self.x_center), "ihat": list(self.ihat),
                "status": self.status, "regression": self.regression.to_dict()}


@dataclass
class WavefrontReport:
    cells: list
    x_cells: int
    angle_cells: int
    n: int
    order: SymbolOrder
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self._by_key = {c.key: c for c in self.cells}

    def cell(self, x_index, angle_index) -> ScanCell:
        return self._by_key[(tuple(x_index), int(angle_index))]

    def keys(self, status: str | Sequence[str]) -> set:
        st = {status} if isinstance(status, str) else set(status)
        return {c.key for c in self.cells if c.status in st}

    @property
    def detected(self) -> set:
        return self.keys("detected")

    @property
    def mass(self) -> set:
        return self.keys(("mass", "detected"))

    def locate(self, theta, ihat) -> tuple:
        """Cell key whose center is nearest to (theta, ihat)."""
        theta = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        xi = tuple(int(v) % self.x_cells for v in np.round(theta / (2 * np.pi / self.x_cells)))
        dirs = _angle_centers(self.n, self.angle_cells)
        ai = int(np.argmax(dirs @ np.asarray(ihat, dtype=float)))
        return (xi, ai)

    def to_dict(self) -> dict:
        return {"n": self.n, "x_cells": self.x_cells, "angle_cells": self.angle_cells,
                "order": {"m": self.order.m, "l": self.order.l}, "metadata": self.metadata,
                "cells": [c.to_dict() for c in self.cells]}

    def to_json(self, path=None) -> str:
        s = json.dumps(self.to_dict(), indent=1, default=_jsonable)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s)
        return s

    def to_csv(self, path) -> None:
        """Heat-map table: x-cell indices, angle cell, slope, status."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{a}" for a in range(self.n)] + ["angle", "slope", "status"])
            for c in self.cells:
                s = c.regression.slope
                w.writerow(list(c.x_index) + [c.angle_index, "" if math.isnan(s) else repr(s), c.status])


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def _angle_centers(n: int, count: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])[:count]
    if n == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(t), np.sin(t)], -1)
    raise ValueError("angular cells are implemented for n <= 2")


def classify(reg: RegressionResult, threshold: float = DETECT_SLOPE) -> str:
    if reg.no_mass:
        return "no_mass"
    return "detected" if reg.slope < threshold else "mass"


def wf2_scan(fam: SemiclassicalFamily, xi0=None, order=(0, 0), x_cells: int = 8,
             angle_cells: int | None = None, xwidth: float | None = None,
             anglewidth: float | None = None, delta: float = 1.0, eps: float = 1.0,
             kind="left", amp_grid: Grid | None = None,
             threshold: float = DETECT_SLOPE) -> WavefrontReport:
    """Scan x-cells times normal-direction cells with order-(k, l) localizers.

    Member j is tested with the localizer blown up at its own center xi0(h_j)
    (from the family, else ``xi0``).  A cell is ``detected`` when its fitted
    slope is below ``threshold``, i.e. the order-(k, l) localized norms grow.
    """
    order = order if isinstance(order, SymbolOrder) else SymbolOrder(*order)
    n = fam.n
    if angle_cells is None:
        angle_cells = 2 if n == 1 else 16
    xcw = 2 * np.pi / x_cells
    acw = 2 * np.pi / angle_cells
    xwidth = 1.5 * xcw if xwidth is None else float(xwidth)
    anglewidth = 1.5 * acw if anglewidth is None else float(anglewidth)
    if xwidth < 0.5 * xcw or (n > 1 and anglewidth < 0.5 * acw):
        raise ResolutionError("localizer widths below half a cell leave gaps in the cover")
    centers = [fam.center(j, xi0) for j in range(len(fam.members))]
    residuals = [snap_center(c, h)[1] for c, h in zip(centers, fam.hs)]
    dirs = _angle_centers(n, angle_cells)
    cells = []
    for xidx in itertools.product(range(x_cells), repeat=n):
        xc = tuple(xcw * v for v in xidx)
        for ai, d in enumerate(dirs):
            locs = [make_localizer(LocalizerSpec(xc, tuple(d.tolist()), delta, eps, xwidth,
                                                 anglewidth, order, tuple(c.tolist())))
                    for c in centers]
            reg = order_regression(list(zip(fam.hs, localized_norms(fam, locs, kind, amp_grid))))
            cells.append(ScanCell(xidx, ai, xc, tuple(d.tolist()), reg, classify(reg, threshold)))
    meta = {"xwidth": xwidth, "anglewidth": anglewidth, "delta": delta, "eps": eps,
            "kind": _kind(kind).value, "threshold": threshold, "label": fam.label,
            "centers": [c.tolist() for c in centers],
            "lattice_residuals": [None if r is None else r.tolist() for r in residuals]}
    return WavefrontReport(cells, x_cells, angle_cells, n, order, meta)


# -- iterated regularity ------------------------------------------------------------

@dataclass(frozen=True)
class RegularityProfile:
    """depth j -> max over generator words of sup over members of h^-j ||A_1..A_j u||."""

    profile: tuple
    member_values: tuple  # [depth][member], maximized over words
    hs: tuple
    growth_exponent: float  # fit of the deepest entry against 1/h

    @property
    def divergent(self) -> bool:
        return self.growth_exponent > 0.25

    def to_dict(self) -> dict:
        return {"profile": list(self.profile), "member_values": [list(v) for v in self.member_values],
                "hs": list(self.hs), "growth_exponent": self.growth_exponent,
                "divergent": self.divergent}


def _check_generator(g: Symbol, xi0: np.ndarray, h: float, rng: np.random.Generator):
    x = rng.uniform(0, 2 * np.pi, (64, g.n))
    if np.max(np.abs(g(x, xi0[None, :], h))) >= 1e-12:
        raise GeneratorError("generator symbol does not vanish at xi0")


def _apply_word(word, u, kind, amp_grid):
    for g in word:
        if isinstance(u, SparseModeFunction):
            u = apply_symbol_to_modes(g, u, kind, amp_grid)
        else:
            u = apply(quantize(g, u.h, u.grid, kind, form="lazy"), u)
    return u


def iterated_regularity_profile(fam: SemiclassicalFamily, generators: Sequence[Symbol], depth: int,
                                xi0=None, kind="left", amp_grid: Grid | None = None,
                                seed: int = 0) -> RegularityProfile:
    """Depth-j profile over all words of length j in ``generators``."""
    rng = np.random.default_rng(seed)
    for j, (h, _) in enumerate(fam.members):
        c = fam.center(j, xi0)
        for g in generators:
            _check_generator(g, c, h, rng)
    vals = [[l2_norm(u) for _, u in fam.members]]
    for j in range(1, depth + 1):
        best = [0.0] * len(fam.members)
        for word in itertools.product(generators, repeat=j):
            for i, (h, u) in enumerate(fam.members):
                v = l2_norm(_apply_word(word, u, kind, amp_grid)) / h ** j
                best[i] = max(best[i], v)
        vals.append(best)
    last = np.asarray(vals[-1])
    hs = np.asarray(fam.hs)
    if np.all(last > 0):
        growth = float(np.polyfit(np.log(1 / hs), np.log(last), 1)[0])
    else:
        growth = float("-inf") if np.all(last == 0) else float("nan")
    return RegularityProfile(tuple(float(max(v)) for v in vals), tuple(tuple(v) for v in vals),
                             tuple(fam.hs), growth)
