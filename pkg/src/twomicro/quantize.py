"""Exact left/right/Weyl quantization on the torus, spectrally defined.

In the plane-wave basis every quantization is a matrix

    A[k', k] = ahat(k' - k; xi*),   ahat(m; xi) = mean_x a(x, xi) e^{-i m.x},

with xi* = h k (left), h k' (right) or h (k + k')/2 (Weyl).  On the torus
this is the oscillatory integral restricted to trigonometric data, with the
proper-support cutoff dropped.  Frequencies are stored flat in fftshift
order, see :meth:`Grid.flat_freqs`.
"""
from __future__ import annotations

import csv
import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasWarning, CapError, ConvergenceError, MismatchError
from .grid import FourierCoefficients, Grid, GridFunction, SparseModeFunction, fourier
from .symbols import Conj, Symbol, SymbolOrder

DENSE_CAP = 4096
_CHUNK = 1 << 22  # symbol evaluations per block


class QuantizationKind(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    WEYL = "weyl"

    @property
    def t(self) -> float:
        """xi* = h (k + t (k' - k))."""
        return {"left": 0.0, "weyl": 0.5, "right": 1.0}[self.value]

    def swapped(self) -> "QuantizationKind":
        return {QuantizationKind.LEFT: QuantizationKind.RIGHT,
                QuantizationKind.RIGHT: QuantizationKind.LEFT}.get(self, self)


def _kind(kind) -> QuantizationKind:
    return kind if isinstance(kind, QuantizationKind) else QuantizationKind(str(kind).lower())


@dataclass(frozen=True, eq=False)
class OperatorRep:
    kind: QuantizationKind
    symbol: Symbol | None
    h: float
    grid: Grid
    form: str
    matrix: np.ndarray | None = None
    order: SymbolOrder = SymbolOrder()
    _lazy_adjoint: bool = field(default=False, repr=False)

    @property
    def dim(self) -> int:
        return self.grid.size

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.symbol is None:
            raise CapError("operator has no symbol to densify")
        return _dense_matrix(self.symbol, self.h, self.grid, self.kind, cap)

    def __matmul__(self, other: "OperatorRep") -> "OperatorRep":
        _same_space(self, other)
        return OperatorRep(self.kind, None, self.h, self.grid, "dense",
                           _ro(self.dense() @ other.dense()), self.order + other.order)

    def __sub__(self, other: "OperatorRep") -> "OperatorRep":
        _same_space(self, other)
        return OperatorRep(self.kind, None, self.h, self.grid, "dense",
                           _ro(self.dense() - other.dense()), self.order)

    def __add__(self, other: "OperatorRep") -> "OperatorRep":
        _same_space(self, other)
        return OperatorRep(self.kind, None, self.h, self.grid, "dense",
                           _ro(self.dense() + other.dense()), self.order)

    def scaled(self, c: complex) -> "OperatorRep":
        return OperatorRep(self.kind, None, self.h, self.grid, "dense", _ro(c * self.dense()), self.order)

    def to_csv(self, path) -> None:
        A = self.dense()
        K = self.grid.flat_freqs()
        n = self.grid.n
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"kp{a}" for a in range(n)] + [f"k{a}" for a in range(n)] + ["re", "im"])
            rows, cols = np.nonzero(A)
            for r, c in zip(rows, cols):
                v = A[r, c]
                w.writerow(K[r].tolist() + K[c].tolist() + [repr(v.real), repr(v.imag)])


def _ro(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _same_space(A: OperatorRep, B: OperatorRep):
    if A.grid != B.grid or not math.isclose(A.h, B.h, rel_tol=1e-14):
        raise MismatchError("operators act on different grids or at different h")


def _diff_index(grid: Grid, K1: np.ndarray, K2: np.ndarray) -> np.ndarray:
    """Flat index into an (unshifted) fftn array of the frequency (K1 - K2) mod N."""
    N = np.asarray(grid.N)
    m = np.mod(K1 - K2, N)
    return np.ravel_multi_index(tuple(np.moveaxis(m, -1, 0)), grid.shape)


def _slice_transforms(a: Symbol, h: float, grid: Grid, xis: np.ndarray) -> np.ndarray:
    """ahat(m; xi) for each row xi of ``xis``: shape (len(xis), D), fftn order over m."""
    X = grid.flat_points()
    vals = a(X[None, :, :], xis[:, None, :], h)
    vals = np.broadcast_to(vals, (xis.shape[0], X.shape[0])).reshape((xis.shape[0],) + grid.shape)
    axes = tuple(range(1, grid.n + 1))
    return np.fft.fftn(vals, axes=axes).reshape(xis.shape[0], -1) / grid.size


def _tail_fraction(T: np.ndarray, grid: Grid) -> float:
    """Relative l2 mass of x-frequencies with |m_a| >= 3 N_a / 8 on some axis."""
    m = np.abs(np.stack(np.meshgrid(*[np.fft.fftfreq(Na, 1.0 / Na) for Na in grid.N],
                                    indexing="ij"), -1).reshape(-1, grid.n))
    outer = np.any(m >= 3 * np.asarray(grid.N) / 8, axis=1)
    tot = np.sum(np.abs(T) ** 2)
    if tot == 0:
        return 0.0
    return float(np.sum(np.abs(T[:, outer]) ** 2) / tot)


def _entry_blocks(a: Symbol, h: float, grid: Grid, kind: QuantizationKind, threads: int = 1):
    """Yield (rows, cols, values) blocks covering every matrix entry once."""
    K = grid.flat_freqs()
    D = K.shape[0]
    n = grid.n
    if kind is QuantizationKind.WEYL:
        # group entries by k + k'; each group shares one symbol slice
        S = K[:, None, :] + K[None, :, :]
        N = np.asarray(grid.N)
        sidx = np.ravel_multi_index(tuple(np.moveaxis(S + N, -1, 0)), tuple(2 * N))
        flat = sidx.ravel()
        order = np.argsort(flat, kind="stable")
        uniq, starts = np.unique(flat[order], return_index=True)
        ends = np.append(starts[1:], flat.size)
        svals = np.stack(np.unravel_index(uniq, tuple(2 * N)), -1) - N
        midx = _diff_index(grid, K[:, None, :], K[None, :, :]).ravel()
        # Weyl entries are Galerkin-truncated: the true difference k' - k must
        # be a grid frequency, otherwise wrapped pairs would pick up the central midpoint
        valid = np.all(np.abs(K[:, None, :] - K[None, :, :]) < N // 2, axis=-1).ravel()
        per = max(1, _CHUNK // D)
        jobs = [(lo, min(lo + per, len(uniq))) for lo in range(0, len(uniq), per)]

        def work(job):
            lo, hi = job
            T = _slice_transforms(a, h, grid, h * svals[lo:hi] / 2.0)
            sel = order[starts[lo]:ends[hi - 1]]
            grp = np.repeat(np.arange(hi - lo), ends[lo:hi] - starts[lo:hi])
            vals = np.where(valid[sel], T[grp, midx[sel]], 0)
            return sel // D, sel % D, vals, T
    else:
        per = max(1, _CHUNK // D)
        jobs = [(lo, min(lo + per, D)) for lo in range(0, D, per)]

        def work(job):
            lo, hi = job
            T = _slice_transforms(a, h, grid, h * K[lo:hi].astype(float))
            fixed = np.arange(lo, hi)
            other = np.arange(D)
            if kind is QuantizationKind.LEFT:
                cols = np.repeat(fixed, D)
                rows = np.tile(other, hi - lo)
            else:
                rows = np.repeat(fixed, D)
                cols = np.tile(other, hi - lo)
            m = _diff_index(grid, K[rows], K[cols])
            vals = T[np.repeat(np.arange(hi - lo), D), m]
            return rows, cols, vals, T

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            yield from ex.map(work, jobs)
    else:
        for job in jobs:
            yield work(job)


def _dense_matrix(a: Symbol, h: float, grid: Grid, kind: QuantizationKind, cap: int,
                  threads: int = 1, check_alias: bool = True) -> np.ndarray:
    D = grid.size
    if D > cap:
        raise CapError(f"dense form needs {D} > {cap} Fourier dimensions")
    A = np.zeros((D, D), dtype=complex)
    tail = 0.0
    for rows, cols, vals, T in _entry_blocks(a, h, grid, kind, threads):
        A[rows, cols] = vals
        if check_alias:
            tail = max(tail, _tail_fraction(T, grid))
    if check_alias and tail > 1e-8:
        warnings.warn(f"symbol x-bandwidth exceeds grid (tail mass {tail:.2e})", AliasWarning,
                      stacklevel=3)
    return _ro(A)


def quantize(a: Symbol, h: float, grid: Grid, kind="weyl", form: str = "dense",
             cap: int = DENSE_CAP, threads: int = 1, check_alias: bool = True) -> OperatorRep:
    """Quantize ``a`` at semiclassical parameter ``h`` on ``grid``."""
    kind = _kind(kind)
    if a.n != grid.n:
        raise MismatchError("symbol and grid dimensions differ")
    if form == "dense":
        A = _dense_matrix(a, h, grid, kind, cap, threads, check_alias)
        return OperatorRep(kind, a, float(h), grid, "dense", A, a.order)
    if form == "lazy":
        return OperatorRep(kind, a, float(h), grid, "lazy", None, a.order)
    raise ValueError(f"form must be 'dense' or 'lazy', got {form!r}")


# -- application ------------------------------------------------------------------

def _check_h(A: OperatorRep, h: float):
    if not math.isclose(A.h, h, rel_tol=1e-12):
        raise MismatchError(f"operator at h={A.h} applied to field at h={h}")


def _lazy_apply_grid(A: OperatorRep, u: GridFunction) -> GridFunction:
    grid, a, h = A.grid, A.symbol, A.h
    K = grid.flat_freqs().astype(float)
    X = grid.flat_points()
    D = grid.size
    c = fourier(u, "forward").coeffs.reshape(-1)
    per = max(1, _CHUNK // D)
    if A.kind is QuantizationKind.LEFT:
        out = np.zeros(D, dtype=complex)
        for lo in range(0, D, per):
            hi = min(lo + per, D)
            vals = a(X[:, None, :], h * K[None, lo:hi, :], h)
            out += np.sum(vals * np.exp(1j * X @ K[lo:hi].T) * c[lo:hi], axis=1)
        return GridFunction(grid, out, h)
    if A.kind is QuantizationKind.RIGHT:
        coeffs = np.zeros(D, dtype=complex)
        uv = u.values.reshape(-1)
        for lo in range(0, D, per):
            hi = min(lo + per, D)
            vals = a(X[None, :, :], h * K[lo:hi, None, :], h)
            coeffs[lo:hi] = np.mean(vals * np.exp(-1j * K[lo:hi] @ X.T) * uv[None, :], axis=1)
        return fourier(FourierCoefficients(grid, coeffs, h), "inverse")
    out = np.zeros(D, dtype=complex)
    for rows, cols, vals, _ in _entry_blocks(a, h, grid, A.kind):
        np.add.at(out, rows, vals * c[cols])
    return fourier(FourierCoefficients(grid, out, h), "inverse")


def apply(A: OperatorRep, u, amp_grid: Grid | None = None):
    """Apply ``A`` to a grid field or to an exact mode sum.

    Mode sums are acted on mode by mode, e^{ik.x} -> sum_m ahat(m; xi*) e^{i(k+m).x},
    with ahat computed on ``amp_grid`` (default: the operator grid); the result
    is again a :class:`SparseModeFunction`.
    """
    if isinstance(u, SparseModeFunction):
        _check_h(A, u.h)
        if A.symbol is None:
            raise MismatchError("mode-sum action needs the operator's symbol")
        return apply_symbol_to_modes(A.symbol, u, A.kind, amp_grid or A.grid)
    if not isinstance(u, GridFunction):
        raise TypeError(f"cannot apply an operator to {type(u).__name__}")
    _check_h(A, u.h)
    if u.grid != A.grid:
        raise MismatchError("field grid differs from operator grid")
    if A.form == "dense":
        c = fourier(u, "forward").coeffs.reshape(-1)
        out = A.matrix @ c
        return fourier(FourierCoefficients(A.grid, out, u.h), "inverse")
    return _lazy_apply_grid(A, u)


def _mode_transforms(a: Symbol, ks: np.ndarray, h: float, kind: QuantizationKind, amp: Grid):
    """For each mode k: frequencies m on ``amp`` and coefficients ahat(m; h(k + t m))."""
    X = amp.flat_points()
    mf = amp.flat_freqs()  # shifted order
    if kind is QuantizationKind.LEFT:
        vals = a(X[None, :, :], (h * ks.astype(float))[:, None, :], h)
        vals = np.broadcast_to(vals, (ks.shape[0], X.shape[0])).reshape((ks.shape[0],) + amp.shape)
        axes = tuple(range(1, amp.n + 1))
        T = np.fft.fftshift(np.fft.fftn(vals, axes=axes), axes=axes).reshape(ks.shape[0], -1)
        return mf, T / amp.size
    # each output frequency needs its own xi-slice
    t = kind.t
    out = np.empty((ks.shape[0], mf.shape[0]), dtype=complex)
    E = np.exp(-1j * mf.astype(float) @ X.T)  # (M, X)
    for j, k in enumerate(ks):
        xis = h * (k[None, :] + t * mf).astype(float)
        vals = np.broadcast_to(a(X[None, :, :], xis[:, None, :], h), (mf.shape[0], X.shape[0]))
        out[j] = np.mean(vals * E, axis=1)
    return mf, out


def apply_symbol_to_modes(a: Symbol, u: SparseModeFunction, kind="left",
                          amp_grid: Grid | None = None) -> SparseModeFunction:
    kind = _kind(kind)
    if len(u) == 0:
        return u
    amp = amp_grid or Grid.square(u.n, 32)
    mf, T = _mode_transforms(a, u.ks, u.h, kind, amp)
    ks = (u.ks[:, None, :] + mf[None, :, :]).reshape(-1, u.n)
    cs = (T * u.cs[:, None]).reshape(-1)
    keep = cs != 0
    return SparseModeFunction.accumulate(ks[keep], cs[keep], u.h)


def localized_norm(a: Symbol, u: SparseModeFunction, kind="left", amp_grid: Grid | None = None) -> float:
    """||Op(a) u|| for an exact mode sum.

    A single mode under left quantization needs no transform: the output is
    a(x, hk) e^{ik.x}, whose norm is the quadrature of |a(., hk)|^2.
    """
    kind = _kind(kind)
    amp = amp_grid or Grid.square(u.n, 32)
    if len(u) == 0:
        return 0.0
    if kind is QuantizationKind.LEFT and len(u) == 1:
        X = amp.flat_points()
        vals = a(X, (u.h * u.ks[0].astype(float))[None, :], u.h)
        return float(abs(u.cs[0]) * np.sqrt(np.mean(np.abs(vals) ** 2)))
    return float(np.sqrt(np.sum(np.abs(apply_symbol_to_modes(a, u, kind, amp).cs) ** 2)))


# -- adjoints, norms, recovery ------------------------------------------------------

def adjoint(A: OperatorRep) -> OperatorRep:
    """Conjugate transpose; left and right swap and the symbol is conjugated."""
    sym = None if A.symbol is None else Conj(A.symbol)
    if A.form == "lazy":
        if sym is None:
            raise CapError("lazy operator without symbol has no adjoint")
        return OperatorRep(A.kind.swapped(), sym, A.h, A.grid, "lazy", None, A.order)
    return OperatorRep(A.kind.swapped(), sym, A.h, A.grid, "dense",
                       _ro(np.conj(A.matrix.T).copy()), A.order)


def operator_norm(A: OperatorRep, rtol: float = 1e-8, maxiter: int = 10_000,
                  seed: int = 0, method: str = "power") -> float:
    """Largest singular value.

    ``method='power'`` runs power iteration on A*A from a seeded random start and
    stops when successive estimates agree to ``rtol``; ``method='svd'`` uses LAPACK.
    """
    if method == "svd":
        return float(np.linalg.norm(A.dense(), 2))
    D = A.dim
    if A.form == "dense":
        M = A.matrix
        fwd = lambda v: M @ v
        bwd = lambda v: (v.conj() @ M).conj()  # M^H v without copying M
    else:
        B = adjoint(A)
        fwd = lambda v: _coeff_apply(A, v)
        bwd = lambda v: _coeff_apply(B, v)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    v /= np.linalg.norm(v)
    prev = None
    for _ in range(maxiter):
        w = fwd(v)
        est = np.linalg.norm(w)
        if est == 0:
            return 0.0
        v = bwd(w)
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        v = v / nv
        if prev is not None and abs(est - prev) <= rtol * est:
            return float(est)
        prev = est
    raise ConvergenceError(f"power iteration did not reach rtol={rtol} in {maxiter} steps")


def _coeff_apply(A: OperatorRep, c: np.ndarray) -> np.ndarray:
    u = fourier(FourierCoefficients(A.grid, c, A.h), "inverse")
    return fourier(apply(A, u), "forward").coeffs.reshape(-1)


def recover_symbol(A: OperatorRep) -> np.ndarray:
    """Table a(x_j, h k) = sum_k' A[k', k] e^{i(k' - k).x_j}; rows index x, columns k."""
    if A.kind is not QuantizationKind.LEFT:
        raise ValueError("symbol recovery is defined for left quantization")
    M = A.dense()
    grid = A.grid
    K = grid.flat_freqs().astype(float)
    X = grid.flat_points()
    E = np.exp(1j * X @ K.T)  # (x, k)
    return (E @ M) * np.conj(E)


def position_kernel(A: OperatorRep) -> np.ndarray:
    """kappa(x_j, y_j') with (Au)(x) = int kappa(x, y) u(y) dy (Lebesgue dy)."""
    grid = A.grid
    M = A.dense()
    K = grid.flat_freqs().astype(float)
    X = grid.flat_points()
    E = np.exp(1j * X @ K.T)
    return (E @ M @ E.conj().T) / (2 * np.pi) ** grid.n


def kernel_offdiag_decay(A: OperatorRep, separation: float) -> float:
    """max |kappa(x, y)| over grid pairs at torus distance > ``separation``."""
    kap = position_kernel(A)
    X = A.grid.flat_points()
    d = (X[:, None, :] - X[None, :, :] + np.pi) % (2 * np.pi) - np.pi
    far = np.linalg.norm(d, axis=-1) > separation
    if not np.any(far):
        return 0.0
    return float(np.max(np.abs(kap[far])))


def multiplier(grid: Grid, h: float, fn, kind="left") -> OperatorRep:
    """Diagonal Fourier multiplier k -> fn(h k) (exact, no symbol evaluation on x)."""
    K = grid.flat_freqs().astype(float)
    diag = np.asarray(fn(h * K), dtype=complex)
    return OperatorRep(_kind(kind), None, float(h), grid, "dense", _ro(np.diag(diag)))
