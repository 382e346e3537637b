"""Periodic lattices, complex fields and the spectral calculus on them.

A :class:`Grid` samples the box ``[-L, L)^d`` with ``n`` points per axis.
Samples are stored as arrays of shape ``(n,) * d`` indexed ``[i0, i1, ...]``
with ``x_a = -L + h * i_a``; the box centre ``x = 0`` is the lattice point
``i_a = n // 2``.  All integrals are lattice sums times ``h**d``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

# Largest total sample count accepted by make_grid.
MAX_SAMPLES = 1 << 24


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {self.d}")
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(f"n must be a power of two >= 8, got {n}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ConfigurationError(f"half-width L must be positive, got {self.L}")
        if n ** self.d > MAX_SAMPLES:
            raise ConfigurationError(
                f"{n}^{self.d} samples exceeds the memory budget of {MAX_SAMPLES}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def dV(self) -> float:
        """Quadrature weight per sample."""
        return self.h ** self.d

    @property
    def nyquist(self) -> float:
        return np.pi / self.h

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers of one axis in FFT order, ``(pi/L) * {-n/2, ..., n/2-1}``."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def coords(self) -> tuple:
        """Broadcastable coordinate arrays, one per axis."""
        return tuple(np.meshgrid(*([self.axis] * self.d), indexing="ij", sparse=True))

    @cached_property
    def kvec(self) -> tuple:
        return tuple(np.meshgrid(*([self.k] * self.d), indexing="ij", sparse=True))

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(c * c for c in self.coords)

    @cached_property
    def ksq(self) -> np.ndarray:
        return sum(k * k for k in self.kvec)

    @cached_property
    def kvec_diff(self) -> tuple:
        """Wavenumbers for first derivatives: the n/2 mode is zeroed."""
        k = self.k.copy()
        k[self.n // 2] = 0.0
        return tuple(np.meshgrid(*([k] * self.d), indexing="ij", sparse=True))

    def padded(self, factor: int) -> "Grid":
        """Same spacing on a box ``factor`` times wider."""
        return Grid(self.d, self.n * factor, self.L * factor)


def make_grid(d: int, n: int, L: float) -> Grid:
    return Grid(d, n, L)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a field on a grid at time ``t``.

    ``samples`` may be given with shape ``grid.shape`` or flat of length
    ``n**d`` with axis 0 varying fastest.  The stored array is read-only.
    """

    grid: Grid
    samples: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.complex128)
        if arr.ndim == 1 and self.grid.d > 1 and arr.size == self.grid.size:
            arr = arr.reshape(self.grid.shape, order="F")
        if arr.shape != self.grid.shape:
            raise ConfigurationError(
                f"samples of shape {arr.shape} do not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("field samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "t", float(self.t))

    def replace(self, samples=None, t=None) -> "ComplexField":
        return ComplexField(self.grid,
                            self.samples if samples is None else samples,
                            self.t if t is None else t)

    def flat(self) -> np.ndarray:
        return self.samples.ravel(order="F")

    def conj(self) -> "ComplexField":
        return self.replace(np.conj(self.samples))

    def _other(self, other):
        if isinstance(other, ComplexField):
            _check_same_grid(self, other)
            return other.samples
        return other

    def __add__(self, other):
        return self.replace(self.samples + self._other(other))

    def __sub__(self, other):
        return self.replace(self.samples - self._other(other))

    def __mul__(self, other):
        return self.replace(self.samples * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.replace(-self.samples)


def _check_same_grid(f: ComplexField, g: ComplexField):
    if f.grid != g.grid:
        raise ConfigurationError(f"grid mismatch: {f.grid} vs {g.grid}")


def spectral_gradient(f: ComplexField) -> list:
    fh = np.fft.fftn(f.samples)
    return [f.replace(np.fft.ifftn(1j * k * fh)) for k in f.grid.kvec_diff]


def gradient_arrays(samples: np.ndarray, grid: Grid) -> list:
    """Spectral gradient of a raw sample array."""
    fh = np.fft.fftn(samples)
    return [np.fft.ifftn(1j * k * fh) for k in grid.kvec_diff]


def laplacian(f: ComplexField) -> ComplexField:
    return f.replace(np.fft.ifftn(-f.grid.ksq * np.fft.fftn(f.samples)))


def lp_norm(f: ComplexField, p: float) -> float:
    a = np.abs(f.samples)
    if p == np.inf:
        return float(a.max())
    if not p >= 1:
        raise ValueError(f"exponent p must be >= 1 or inf, got {p}")
    return float((f.grid.dV * np.sum(a ** p)) ** (1.0 / p))


def mass(f: ComplexField) -> float:
    return float(f.grid.dV * np.sum(np.abs(f.samples) ** 2))


def inner_product(f: ComplexField, g: ComplexField) -> complex:
    """``h^d * sum(f * conj(g))``."""
    _check_same_grid(f, g)
    return complex(f.grid.dV * np.vdot(g.samples, f.samples))


def fourier_truncate(f: ComplexField, T: float) -> ComplexField:
    """Sharp projection onto the modes with ``|k| <= T``."""
    if T < 0:
        raise ValueError("cutoff must be nonnegative")
    keep = f.grid.ksq <= T * T * (1 + 1e-14)
    if np.all(keep):
        return f
    return f.replace(np.fft.ifftn(np.fft.fftn(f.samples) * keep))


def wrap(y, L: float):
    """Map coordinates periodically into ``[-L, L)``."""
    return np.mod(np.asarray(y, dtype=float) + L, 2 * L) - L


def _axis_modes(grid: Grid, y: np.ndarray) -> np.ndarray:
    """Matrix ``E[p, j]`` evaluating one-axis Fourier coefficients at ``y``.

    The n/2 mode is split symmetrically (a cosine), so interpolation of real
    data stays real and lattice points reproduce the samples exactly.
    """
    s = np.asarray(y, dtype=float)[:, None] + grid.L
    E = np.exp(1j * s * grid.k[None, :])
    E[:, grid.n // 2] = np.cos(s[:, 0] * grid.k[grid.n // 2])
    return E / grid.n


def resample_tensor(f: ComplexField, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Trigonometric interpolant of ``f`` on the tensor product of ``axes``."""
    out = np.fft.fftn(f.samples)
    for a, y in enumerate(axes):
        E = _axis_modes(f.grid, y)
        out = np.moveaxis(np.tensordot(E, np.moveaxis(out, a, 0), axes=(1, 0)), 0, a)
    return out


def bandlimited_resample(f: ComplexField, points, chunk: int = 2048) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary points.

    ``points`` has shape ``(P, d)`` (or ``(P,)`` in one dimension) and must lie
    in the closed box ``[-L, L]^d``; wrapping is the caller's job.
    """
    g = f.grid
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if g.d == 1 else pts[None, :]
    if pts.shape[1] != g.d:
        raise ValueError(f"points must have {g.d} coordinates")
    if np.any(pts < -g.L) or np.any(pts > g.L):
        raise ValueError("resample point outside the periodic box")
    F = np.fft.fftn(f.samples)
    out = np.empty(len(pts), dtype=np.complex128)
    for start in range(0, len(pts), chunk):
        p = pts[start:start + chunk]
        acc = F
        # contract the last axis first so the working array shrinks
        acc = np.tensordot(acc, _axis_modes(g, p[:, g.d - 1]), axes=([g.d - 1], [1]))
        for a in range(g.d - 2, -1, -1):
            E = _axis_modes(g, p[:, a])
            # acc has shape (n,)*(a+1) + (P,); contract axis a with E row-wise
            acc = np.einsum("...jp,pj->...p", acc, E)
        out[start:start + chunk] = acc
    return out


def fourier_shift(f: ComplexField, a) -> np.ndarray:
    """Samples of the periodic translate ``x -> f(x + a)``."""
    g = f.grid
    a = np.broadcast_to(np.asarray(a, dtype=float), (g.d,))
    F = np.fft.fftn(f.samples)
    for ax in range(g.d):
        ph = np.exp(1j * g.k * a[ax])
        ph[g.n // 2] = np.cos(g.k[g.n // 2] * a[ax])
        shape = [1] * g.d
        shape[ax] = g.n
        F = F * ph.reshape(shape)
    return np.fft.ifftn(F)


def reflect(samples: np.ndarray) -> np.ndarray:
    """Samples of ``x -> f(-x)`` (exact on the symmetric lattice)."""
    out = samples
    for ax in range(samples.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def centered_block(samples: np.ndarray, n: int) -> np.ndarray:
    """Central ``n**d`` block of a padded array with the same spacing."""
    N = samples.shape[0]
    lo = (N - n) // 2
    return samples[(slice(lo, lo + n),) * samples.ndim]


def embed_centered(samples: np.ndarray, N: int) -> np.ndarray:
    """Zero-pad an ``n**d`` array into the centre of an ``N**d`` array."""
    n = samples.shape[0]
    out = np.zeros((N,) * samples.ndim, dtype=samples.dtype)
    lo = (N - n) // 2
    out[(slice(lo, lo + n),) * samples.ndim] = samples
    return out
