"""Named experiments, their default parameters and pass/fail checks.

Each runner takes validated parameters and returns an :class:`Outcome` whose
checks are computed from numbers stored in the outcome itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .bump import Trig
from .calculus import (HSweep, SweepResult, commutator_order, convert_order, moyal_order,
                       norm_scaling, offdiag_decay)
from .errors import ConfigError
from .grid import Grid, fourier, l2_norm, make_mode, random_field, SparseModeFunction
from .integrable import (apply_flat_hamiltonian, flat_model, isoenergetic, linear_model,
                         orbit_closure, uk_family, uk_quasimode, parse_rational,
                         propagation_check, wkb_family)
from .microlocal import SemiclassicalFamily, iterated_regularity_profile, wf2_scan, wf_decay_order
from .quantize import adjoint, apply, quantize
from .symbols import (LocalizerSpec, SymbolOrder, constant, make_bump_symbol, make_localizer,
                      xi_monomial)

SCHEMA = "twomicro/1"
DEFAULTS_VERSION = "1"

# every tolerance and default parameter, echoed into each report
DEFAULTS: dict = {
    "quantize-check": {"n": 2, "N": 16, "h": 0.125, "tol": 1e-12},
    "convert-order": {"from": "left", "to": "right", "Ns": [0, 1, 2], "xiwidth": 2.0,
                      "j0": 3, "j1": 9, "min_gain": 0.7, "norm": "power"},
    "moyal-order": {"Ns": [0, 1, 2], "xiwidth": [2.0, 2.1], "j0": 3, "j1": 9,
                    "slack": 0.3, "norm": "power"},
    "commutator-order": {"kinds": ["weyl", "left"], "min_slope": {"weyl": 1.7, "left": 0.7},
                         "xiwidth": [2.0, 2.1], "j0": 3, "j1": 9, "norm": "power"},
    "norm-scaling": {"ms": [0, 1, 2], "xwidth": 3.0, "delta": 2.0, "eps": 1.0, "kind": "weyl",
                     "j0": 3, "j1": 9, "max_ratio": 1.5, "norm": "power"},
    "offdiag-decay": {"xiwidth": 4.0, "separation": 0.5, "j0": 3, "j1": 8, "min_slope": 4.0},
    "wf-scan": {"xi_star": [1.0, 0.0], "centers": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]],
                "xiwidth": 0.5, "j0": 3, "j1": 9, "tol": 0.15},
    "wf2-scan": {"ks": [8, 16, 32, 64], "xi0": [1.0, 0.0], "order": [0, 0], "x_cells": 8,
                 "angle_cells": 16, "far_angle": math.pi / 4, "tol": 0.15},
    "iterated-regularity": {"ks": [8, 16, 32, 64], "depth": 4, "xi0": [1.0, 0.0],
                            "residual_ks": [1, 64], "residual_tol": 1e-10, "rel_tol": 1e-8},
    "isoenergetic": {"model": "flat", "xi0": ["1", "0"], "E": "1", "omega": ["1", "0"]},
    "orbit-closure": {"model": "flat", "xi0": ["1", "0"], "E": "1", "omega": ["1", "0"],
                      "ihat": ["0", "1"], "expect_dimension": None},
    "propagation-consistency": {"ks": [8, 16, 32, 64], "xi0": [1.0, 0.0], "times": 8,
                                "t_max": 3.0, "control_j0": 3, "control_j1": 9,
                                "control_order": [4, 0]},
}

EXPERIMENTS = tuple(DEFAULTS)


@dataclass
class Check:
    name: str
    value: float | str | None
    op: str
    threshold: float | str | None

    @property
    def passed(self) -> bool:
        v, t = self.value, self.threshold
        if self.op == "==":
            return v == t
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        return {"<=": v <= t, ">=": v >= t, "<": v < t, ">": v > t}[self.op]

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "op": self.op,
                "threshold": self.threshold, "pass": self.passed}


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)
    heatmaps: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def resolve_params(experiment: str, params: dict | None) -> dict:
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    params = dict(params or {})
    unknown = set(params) - set(DEFAULTS[experiment])
    if unknown:
        raise ConfigError(f"unknown parameters for {experiment}: {sorted(unknown)}")
    out = dict(DEFAULTS[experiment])
    out.update(params)
    return out


def _sweep(p, n=1, xi_extent=None) -> HSweep:
    try:
        return HSweep.geometric(int(p["j0"]), int(p["j1"]), n=n, xi_extent=xi_extent)
    except Exception as e:  # DataError on bad ranges
        raise ConfigError(str(e)) from e


def _pair(widths):
    wa, wb = widths
    a = make_bump_symbol(1, 0.3, wa, xtrig=[Trig.of({0: 1, 1: 0.4, -1: 0.4})])
    b = make_bump_symbol(1, 0.1, wb, xtrig=[Trig.of({0: 0.5, 1: 0.3j, -1: -0.3j})])
    return a, b, max(0.3 + wa, 0.1 + wb) + 0.1


# -- runners --------------------------------------------------------------------

def run_quantize_check(p, seed, threads) -> Outcome:
    n, N, h, tol = int(p["n"]), int(p["N"]), float(p["h"]), float(p["tol"])
    g = Grid.square(n, N)
    rng = np.random.default_rng(seed)
    spec = LocalizerSpec(x0=(1.0,) * n, ihat0=(1.0,) + (0.0,) * (n - 1), delta=1.0, eps=1.0,
                         xwidth=2.0, anglewidth=2.0, xi0=(0.0,) * n)
    loc = make_localizer(spec)
    cx = make_bump_symbol(n, 0.1, 0.6, xtrig=[Trig.of({0: 1, 1: 0.5j, -2: 0.2})] * n)
    out = Outcome()
    I = quantize(constant(n), h, g, "left", check_alias=False).matrix
    out.checks.append(Check("Opl(1)=Id", float(np.max(np.abs(I - np.eye(g.size)))), "<=", tol))
    A = quantize(loc, h, g, "left", check_alias=False)
    X = g.points()
    worst = 0.0
    for k in g.flat_freqs():
        if not g.representable(k):
            continue
        e = make_mode(g, k, h)
        lhs = apply(A, e).values
        rhs = loc(X, h * k.astype(float), h) * e.values
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    out.checks.append(Check("pure-mode action", worst, "<=", tol))
    Al = quantize(cx, h, g, "left", check_alias=False)
    Ar = quantize(cx.conj(), h, g, "right", check_alias=False)
    d = np.max(np.abs(adjoint(Al).matrix - Ar.matrix)) / np.max(np.abs(Ar.matrix))
    out.checks.append(Check("adjoint(Opl a)=Opr(conj a)", float(d), "<=", tol))
    W = quantize(loc, h, g, "weyl", check_alias=False).matrix
    herm = np.max(np.abs(W - W.conj().T)) / max(np.max(np.abs(W)), 1e-300)
    out.checks.append(Check("Opw(real) Hermitian", float(herm), "<=", tol))
    u = random_field(g, h, rng)
    pars = abs(l2_norm(u) - l2_norm(fourier(u))) / l2_norm(u)
    out.checks.append(Check("Parseval", float(pars), "<=", tol))
    out.results = {"grid": list(g.N), "h": h}
    return out


def run_convert_order(p, seed, threads) -> Outcome:
    a = make_bump_symbol(1, 0.3, float(p["xiwidth"]), xtrig=[Trig.of({0: 1, 1: 0.4, -1: 0.4})])
    sw = _sweep(p, xi_extent=0.4 + float(p["xiwidth"]))
    res = convert_order(a, p["from"], p["to"], tuple(p["Ns"]), sw, p["norm"], seed, threads)
    out = Outcome(sweeps=res)
    slopes = [r.regression.slope for r in res]
    for (N0, s0), (N1, s1) in zip(zip(p["Ns"], slopes), zip(p["Ns"][1:], slopes[1:])):
        out.checks.append(Check(f"gain N={N0}->{N1}", s1 - s0, ">=", float(p["min_gain"])))
    out.results = {r.label: r.regression.to_dict() for r in res}
    return out


def run_moyal_order(p, seed, threads) -> Outcome:
    a, b, ext = _pair(p["xiwidth"])
    res = moyal_order(a, b, tuple(p["Ns"]), _sweep(p, xi_extent=ext), p["norm"], seed, threads)
    out = Outcome(sweeps=res)
    for N, r in zip(p["Ns"], res):
        out.checks.append(Check(f"slope N={N}", r.regression.slope, ">=", N + 1 - float(p["slack"])))
    out.results = {r.label: r.regression.to_dict() for r in res}
    return out


def run_commutator_order(p, seed, threads) -> Outcome:
    a, b, ext = _pair(p["xiwidth"])
    out = Outcome()
    for kind in p["kinds"]:
        r = commutator_order(a, b, kind, _sweep(p, xi_extent=ext), p["norm"], seed, threads)
        out.sweeps.append(r)
        out.checks.append(Check(f"slope {kind}", r.regression.slope, ">=", float(p["min_slope"][kind])))
        out.results[kind] = r.regression.to_dict()
    return out


def run_norm_scaling(p, seed, threads) -> Outcome:
    out = Outcome()
    for m in p["ms"]:
        spec = LocalizerSpec(x0=(1.0,), ihat0=(1.0,), delta=float(p["delta"]), eps=float(p["eps"]),
                             xwidth=float(p["xwidth"]), anglewidth=1.0, order=SymbolOrder(m, m))
        sw = _sweep(p, xi_extent=float(p["delta"]) + 0.1)
        r = norm_scaling(spec, p["kind"], sw, p["norm"], seed, threads)
        vals = [pt.value for pt in r.points]
        ratio = max(vals) / vals[0] if vals[0] > 0 else float("inf")
        out.sweeps.append(r)
        out.checks.append(Check(f"sup/first m={m}", ratio, "<=", float(p["max_ratio"])))
        out.results[f"m={m}"] = {"values": vals, "ratio": ratio}
    return out


def run_offdiag_decay(p, seed, threads) -> Outcome:
    a = make_bump_symbol(1, 0.0, float(p["xiwidth"]), xtrig=[Trig.of({0: 1, 1: 0.4, -1: 0.4})])
    r = offdiag_decay(a, float(p["separation"]), "left", _sweep(p, xi_extent=float(p["xiwidth"]) + 0.1),
                      threads)
    out = Outcome(sweeps=[r])
    out.checks.append(Check("decay slope", r.regression.slope, ">=", float(p["min_slope"])))
    out.results = {"regression": r.regression.to_dict()}
    return out


def run_wf_scan(p, seed, threads) -> Outcome:
    xs = np.asarray(p["xi_star"], dtype=float)
    n = xs.size
    hs = [2.0 ** -j for j in range(int(p["j0"]), int(p["j1"]) + 1)]
    mem = []
    for h in hs:
        k = np.round(xs / h).astype(int)
        mem.append((h, SparseModeFunction(k[None, :], np.array([1.0]), h)))
    fam = SemiclassicalFamily(tuple(mem), "modes")
    out = Outcome()
    for c in p["centers"]:
        loc = make_bump_symbol(n, c, float(p["xiwidth"]))
        reg = wf_decay_order(fam, loc, "left", Grid.square(n, 8))
        key = "xi=" + ",".join(f"{v:g}" for v in c)
        out.results[key] = reg.to_dict()
        if np.allclose(c, xs):
            out.checks.append(Check(f"|slope| at {key}", abs(reg.slope), "<=", float(p["tol"])))
        elif np.max(np.abs(np.asarray(c) - xs)) > float(p["xiwidth"]) + 1e-9:
            out.checks.append(Check(f"no_mass at {key}", "no_mass" if reg.no_mass else "mass",
                                    "==", "no_mass"))
    return out


def _angle_to(d, target) -> float:
    d, target = np.asarray(d), np.asarray(target)
    return float(np.arccos(np.clip(d @ target / np.linalg.norm(d) / np.linalg.norm(target), -1, 1)))


def run_wf2_scan(p, seed, threads) -> Outcome:
    fam = uk_family(p["ks"], p["xi0"])
    rep = wf2_scan(fam, order=tuple(p["order"]), x_cells=int(p["x_cells"]),
                   angle_cells=int(p["angle_cells"]))
    out = Outcome(heatmaps={"wf2": rep})
    far = [c for c in rep.cells if _angle_to(c.ihat, (0.0, 1.0)) > float(p["far_angle"]) + 1e-12]
    worst = max(max(c.regression.values) for c in far)
    out.checks.append(Check("far cells max localized norm", worst, "<", 1e-13))
    acw = 2 * np.pi / rep.angle_cells
    near = [c for c in rep.cells if _angle_to(c.ihat, (0.0, 1.0)) < acw / 2]
    dev = max(abs(c.regression.slope) for c in near)
    out.checks.append(Check("max |slope| on cells containing (0,1)", dev, "<=", float(p["tol"])))
    out.results = {"detected": sorted(map(str, rep.detected)), "mass_cells": len(rep.mass),
                   "far_cells": len(far), "near_cells": len(near), "report": rep.to_dict()}
    return out


def run_iterated_regularity(p, seed, threads) -> Outcome:
    out = Outcome()
    lo, hi = p["residual_ks"]
    res = max(l2_norm(apply_flat_hamiltonian(uk_quasimode(k)[1])) for k in range(lo, hi + 1))
    out.checks.append(Check(f"max ||P u_k||, k={lo}..{hi}", res, "<=", float(p["residual_tol"])))
    fam = uk_family(p["ks"], p["xi0"])
    prof = iterated_regularity_profile(fam, [xi_monomial(2, 1)], int(p["depth"]), p["xi0"], seed=seed)
    ks = sorted(p["ks"])
    err = max(abs(v - k ** m) / k ** m for m, row in enumerate(prof.member_values)
              for k, v in zip(ks, row))
    out.checks.append(Check("max rel |profile - k^m|", err, "<=", float(p["rel_tol"])))
    out.checks.append(Check("divergent (not Lagrangian)", str(prof.divergent), "==", "True"))
    out.results = {"profile": prof.to_dict(), "ks": ks}
    return out


def _model(p):
    try:
        if p["model"] == "flat":
            return flat_model([parse_rational(v) for v in p["xi0"]], parse_rational(p["E"]))
        if p["model"] == "linear":
            return linear_model([parse_rational(v) for v in p["omega"]])
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(str(e)) from e
    raise ConfigError(f"unknown model {p['model']!r}; use 'flat' or 'linear'")


def _det_oracle(model) -> Fraction:
    # [[2 I, 2 xi0], [2 xi0^T, 0]] has determinant -2^(n+1) |xi0|^2
    if model.name == "flat":
        xi0 = model.params["xi0"]
        return -(2 ** (model.n + 1)) * sum(Fraction(v) ** 2 for v in xi0)
    return Fraction(0)


def run_isoenergetic(p, seed, threads) -> Outcome:
    model = _model(p)
    M = isoenergetic(model)
    out = Outcome(results=M.to_dict())
    out.checks.append(Check("det vs oracle", str(M.det), "==", str(_det_oracle(model))))
    return out


def run_orbit_closure(p, seed, threads) -> Outcome:
    model = _model(p)
    ihat = [parse_rational(v) for v in p["ihat"]]
    oc = orbit_closure(isoenergetic(model), ihat)
    out = Outcome(results=oc.to_dict())
    exp = p["expect_dimension"]
    if exp is None:
        exp = model.n if model.name == "flat" else 1
    out.checks.append(Check("closure dimension", oc.dimension, "==", int(exp)))
    return out


def run_propagation_consistency(p, seed, threads) -> Outcome:
    xi0 = [float(v) for v in p["xi0"]]
    fam = uk_family(p["ks"], xi0)
    model = flat_model(xi0)
    M = isoenergetic(model)
    omega = [float(v) for v in M.omega]
    hess = [[float(v) for v in r] for r in M.hessian]
    times = np.linspace(0.0, float(p["t_max"]), int(p["times"]) + 1)[1:]
    out = Outcome()
    for order in ((0, 0), (1, 0)):
        rep = wf2_scan(fam, order=order)
        out.heatmaps[f"uk-order-{order[0]}-{order[1]}"] = rep
        for label, cells in (("detected", rep.detected), ("mass", rep.mass)):
            chk = propagation_check(rep, cells, omega, hess, times)
            out.checks.append(Check(f"order {order} {label} set invariant", str(chk.invariant), "==", "True"))
            out.results[f"order {order} {label}"] = {"cells": len(cells), **chk.to_dict()}
    ctrl = wkb_family([2.0 ** -j for j in range(int(p["control_j0"]), int(p["control_j1"]) + 1)],
                      xi0, {(0, 0): 1.0, (1, 0): 0.5, (0, 2): 0.25j, (-1, 1): 0.3})
    rc = wf2_scan(ctrl, order=tuple(p["control_order"]))
    out.heatmaps["wkb-control"] = rc
    out.checks.append(Check("WKB control detected cells", len(rc.detected), "==", 0))
    out.results["wkb control"] = {"detected": len(rc.detected), "mass_cells": len(rc.mass)}
    return out


RUNNERS: dict[str, Callable] = {
    "quantize-check": run_quantize_check,
    "convert-order": run_convert_order,
    "moyal-order": run_moyal_order,
    "commutator-order": run_commutator_order,
    "norm-scaling": run_norm_scaling,
    "offdiag-decay": run_offdiag_decay,
    "wf-scan": run_wf_scan,
    "wf2-scan": run_wf2_scan,
    "iterated-regularity": run_iterated_regularity,
    "isoenergetic": run_isoenergetic,
    "orbit-closure": run_orbit_closure,
    "propagation-consistency": run_propagation_consistency,
}


def run_experiment(experiment: str, params: dict | None = None, seed: int = 0, threads: int = 1) -> Outcome:
    return RUNNERS[experiment](resolve_params(experiment, params), seed, threads)
