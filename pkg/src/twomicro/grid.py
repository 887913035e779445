"""Periodic grids on the torus (R/2piZ)^n, discrete fields and exact mode sums.

The torus carries the normalized measure dx/(2pi)^n, so a pure mode
e^{ik.x} has unit L2 norm and Fourier coefficients are c_k = mean(u e^{-ik.x}).
With this normalization the DFT is unitary from L2(T^n) onto l2(Z^n).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AliasError, MismatchError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``N[a]`` points on axis ``a``."""

    N: tuple[int, ...]

    def __post_init__(self):
        N = tuple(int(v) for v in np.atleast_1d(self.N))
        if len(N) == 0:
            raise ValueError("grid needs at least one axis")
        for v in N:
            if v < 2 or v % 2:
                raise ValueError(f"points per axis must be even and >= 2, got {v}")
        object.__setattr__(self, "N", N)

    @classmethod
    def square(cls, n: int, N: int) -> "Grid":
        return cls((N,) * n)

    @property
    def n(self) -> int:
        return len(self.N)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.N

    @property
    def size(self) -> int:
        return int(np.prod(self.N))

    def axes(self) -> list[np.ndarray]:
        return [2 * np.pi * np.arange(Na) / Na for Na in self.N]

    def points(self) -> np.ndarray:
        """Grid points, shape ``(*N, n)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def freq_axes(self) -> list[np.ndarray]:
        return [np.arange(-Na // 2, Na // 2) for Na in self.N]

    def freqs(self) -> np.ndarray:
        """Integer frequencies in [-N/2, N/2), shape ``(*N, n)``, fftshift order."""
        return np.stack(np.meshgrid(*self.freq_axes(), indexing="ij"), axis=-1)

    def flat_freqs(self) -> np.ndarray:
        return self.freqs().reshape(-1, self.n)

    def flat_points(self) -> np.ndarray:
        return self.points().reshape(-1, self.n)

    def representable(self, k) -> bool:
        k = np.asarray(k)
        return bool(np.all(np.abs(k) < np.asarray(self.N) // 2))

    def freq_index(self, k) -> tuple[int, ...]:
        """Array index of frequency ``k`` in fftshift order."""
        k = np.asarray(k, dtype=int)
        half = np.asarray(self.N) // 2
        if np.any(k < -half) or np.any(k >= half):
            raise AliasError(f"frequency {k.tolist()} outside grid range {self.N}")
        return tuple((k + half).tolist())


@dataclass(frozen=True)
class GridFunction:
    grid: Grid
    values: np.ndarray
    h: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        if not (0 < self.h <= 1):
            raise ValueError(f"h must lie in (0, 1], got {self.h}")
        object.__setattr__(self, "values", _frozen(v.reshape(self.grid.shape)))
        object.__setattr__(self, "h", float(self.h))

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid or other.h != self.h:
            raise MismatchError("fields live on different grids or at different h")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values + other.values, self.h)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values - other.values, self.h)

    def __mul__(self, alpha) -> "GridFunction":
        return GridFunction(self.grid, alpha * self.values, self.h)

    __rmul__ = __mul__

    def inner(self, other: "GridFunction") -> complex:
        """<self, other> under the normalized measure, antilinear in ``self``."""
        self._check(other)
        return complex(np.mean(np.conj(self.values) * other.values))

    def to_csv(self, path) -> None:
        _dump_csv(path, self.values.ravel())


@dataclass(frozen=True)
class FourierCoefficients:
    grid: Grid
    coeffs: np.ndarray
    h: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(self.grid.shape)
        object.__setattr__(self, "coeffs", _frozen(c))

    def __getitem__(self, k) -> complex:
        return complex(self.coeffs[self.grid.freq_index(k)])

    def to_csv(self, path) -> None:
        _dump_csv(path, self.coeffs.ravel())


@dataclass(frozen=True)
class SparseModeFunction:
    """Finite trigonometric sum sum_j c_j e^{i k_j.x} with distinct ``k_j``."""

    ks: np.ndarray
    cs: np.ndarray
    h: float
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=np.int64)
        cs = np.asarray(self.cs, dtype=complex).ravel()
        if ks.ndim == 1:
            ks = ks.reshape(1, -1) if cs.size == 1 else ks.reshape(-1, 1)
        if ks.shape[0] != cs.size:
            raise ValueError("one coefficient per mode required")
        if not self.h > 0:
            raise ValueError("h must be positive")
        index = {tuple(k): j for j, k in enumerate(ks.tolist())}
        if len(index) != ks.shape[0]:
            raise ValueError("mode vectors must be pairwise distinct")
        object.__setattr__(self, "ks", _frozen(ks))
        object.__setattr__(self, "cs", _frozen(cs))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_dict(cls, modes: dict, h: float, n: int | None = None) -> "SparseModeFunction":
        if not modes:
            if n is None:
                raise ValueError("dimension needed for an empty mode sum")
            return cls(np.zeros((0, n), dtype=np.int64), np.zeros(0, dtype=complex), h)
        ks = np.array([list(k) for k in modes], dtype=np.int64)
        return cls(ks, np.array(list(modes.values()), dtype=complex), h)

    @classmethod
    def accumulate(cls, ks: np.ndarray, cs: np.ndarray, h: float) -> "SparseModeFunction":
        """Build from possibly repeated modes, summing coefficients."""
        ks = np.asarray(ks, dtype=np.int64)
        cs = np.asarray(cs, dtype=complex).ravel()
        if ks.shape[0] == 0:
            return cls(ks.reshape(0, ks.shape[-1] if ks.ndim == 2 else 1), cs, h)
        uniq, inv = np.unique(ks, axis=0, return_inverse=True)
        out = np.zeros(uniq.shape[0], dtype=complex)
        np.add.at(out, inv.ravel(), cs)
        return cls(uniq, out, h)

    @property
    def n(self) -> int:
        return self.ks.shape[1]

    def __len__(self) -> int:
        return self.ks.shape[0]

    def coefficient(self, k) -> complex:
        j = self._index.get(tuple(int(v) for v in k))
        return 0j if j is None else complex(self.cs[j])

    def __mul__(self, alpha) -> "SparseModeFunction":
        return SparseModeFunction(self.ks, alpha * self.cs, self.h)

    __rmul__ = __mul__

    def __add__(self, other: "SparseModeFunction") -> "SparseModeFunction":
        if other.h != self.h:
            raise MismatchError("mode sums at different h")
        return SparseModeFunction.accumulate(
            np.concatenate([self.ks, other.ks]), np.concatenate([self.cs, other.cs]), self.h)

    def shifted(self, k0) -> "SparseModeFunction":
        """Multiply by e^{i k0.x} (shift every mode by ``k0``)."""
        return SparseModeFunction(self.ks + np.asarray(k0, dtype=np.int64), self.cs, self.h)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Values at points ``x`` of shape ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        phase = np.tensordot(x, self.ks.T.astype(float), axes=([-1], [0]))
        return np.exp(1j * phase) @ self.cs

    def densify(self, grid: Grid) -> GridFunction:
        if grid.n != self.n:
            raise MismatchError("dimension mismatch")
        coeffs = np.zeros(grid.shape, dtype=complex)
        for k, c in zip(self.ks, self.cs):
            coeffs[grid.freq_index(k)] += c
        return fourier(FourierCoefficients(grid, coeffs, self.h), "inverse")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"k{a}" for a in range(self.n)] + ["re", "im"])
            for k, c in zip(self.ks.tolist(), self.cs):
                w.writerow(k + [repr(c.real), repr(c.imag)])


def _dump_csv(path, flat: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for j, v in enumerate(flat):
            w.writerow([j, repr(v.real), repr(v.imag)])


def make_mode(grid: Grid, k: Sequence[int], h: float) -> GridFunction:
    """The plane wave e^{i k.x} sampled on ``grid``; Nyquist excluded."""
    k = np.asarray(k, dtype=int).reshape(-1)
    if k.size != grid.n:
        raise ValueError("frequency dimension does not match grid")
    if not grid.representable(k):
        raise AliasError(f"|k| must be < N/2 on every axis; k={k.tolist()}, N={grid.N}")
    return GridFunction(grid, np.exp(1j * grid.points() @ k.astype(float)), h)


def fourier(u, direction: str = "forward"):
    """Unitary DFT between grid values and coefficients indexed by k in [-N/2, N/2)."""
    axes = None
    if direction == "forward":
        if not isinstance(u, GridFunction):
            raise TypeError("forward transform expects a GridFunction")
        c = np.fft.fftshift(np.fft.fftn(u.values, axes=axes), axes=axes) / u.grid.size
        return FourierCoefficients(u.grid, c, u.h)
    if direction == "inverse":
        if not isinstance(u, FourierCoefficients):
            raise TypeError("inverse transform expects FourierCoefficients")
        v = np.fft.ifftn(np.fft.ifftshift(u.coeffs, axes=axes), axes=axes) * u.grid.size
        return GridFunction(u.grid, v, u.h)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def l2_norm(u) -> float:
    """L2 norm under the normalized torus measure."""
    if isinstance(u, SparseModeFunction):
        return float(np.sqrt(np.sum(np.abs(u.cs) ** 2)))
    if isinstance(u, GridFunction):
        return float(np.sqrt(np.mean(np.abs(u.values) ** 2)))
    if isinstance(u, FourierCoefficients):
        return float(np.sqrt(np.sum(np.abs(u.coeffs) ** 2)))
    raise TypeError(f"cannot take the norm of {type(u).__name__}")


def torus_distance(d: np.ndarray) -> np.ndarray:
    """Componentwise signed distance wrapped into [-pi, pi)."""
    return (np.asarray(d) + np.pi) % (2 * np.pi) - np.pi


def random_field(grid: Grid, h: float, rng: np.random.Generator, band: int | None = None) -> GridFunction:
    """Gaussian random field; with ``band`` only |k_a| <= band is populated."""
    c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if band is not None:
        mask = np.all(np.abs(grid.freqs()) <= band, axis=-1)
        c = np.where(mask, c, 0)
    return fourier(FourierCoefficients(grid, c, h), "inverse")


def iter_modes(u: SparseModeFunction) -> Iterable[tuple[np.ndarray, complex]]:
    return zip(u.ks, u.cs)
