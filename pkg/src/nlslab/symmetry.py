"""Symmetry group of the mass-critical NLS acting on snapshots.

The canonical element acts by

    (g f)(x) = lam^(d/2) exp(i x.xi0) exp(i gamma0) f(lam x + x0).

The Galilean boost of the flow, ``exp(i (b/2).(x - (b/2) t)) u(t, x - b t)``,
is written with the boost vector ``b``; at ``t = 0`` it coincides with the
group element ``(1, 0, b/2, 0)``.  The two conventions are kept apart:
:func:`galilean_boost` takes ``b``, :class:`GroupElement` stores ``xi0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, fourier_shift, reflect, resample_tensor

# Per-application dilation range certified for band-limited resampling.
LAMBDA_RANGE = (0.25, 4.0)


@dataclass(frozen=True)
class GroupElement:
    lam: float
    x0: tuple
    xi0: tuple
    gamma0: float = 0.0

    def __post_init__(self):
        x0 = tuple(float(v) for v in np.atleast_1d(self.x0))
        xi0 = tuple(float(v) for v in np.atleast_1d(self.xi0))
        if len(x0) != len(xi0):
            raise ValueError("x0 and xi0 must have the same dimension")
        vals = (self.lam, self.gamma0) + x0 + xi0
        if not all(np.isfinite(vals)):
            raise ValueError("group parameters must be finite")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "xi0", xi0)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "gamma0", float(self.gamma0))

    @property
    def d(self) -> int:
        return len(self.x0)

    @classmethod
    def identity(cls, d: int) -> "GroupElement":
        return cls(1.0, (0.0,) * d, (0.0,) * d, 0.0)

    def as_array(self) -> np.ndarray:
        """``[lam, x0..., xi0..., gamma0]``."""
        return np.array((self.lam,) + self.x0 + self.xi0 + (self.gamma0,))

    @classmethod
    def from_array(cls, a) -> "GroupElement":
        a = np.asarray(a, dtype=float)
        d = (len(a) - 2) // 2
        return cls(a[0], a[1:1 + d], a[1 + d:1 + 2 * d], a[-1])

    def distance(self, other: "GroupElement") -> float:
        """Max parameter difference, phases compared modulo 2 pi."""
        diff = self.as_array() - other.as_array()
        diff[-1] = np.angle(np.exp(1j * diff[-1]))
        return float(np.max(np.abs(diff)))


def compose(g2: GroupElement, g1: GroupElement) -> GroupElement:
    """Element acting as ``g2(g1 f)``."""
    x01, x02 = np.array(g1.x0), np.array(g2.x0)
    xi1, xi2 = np.array(g1.xi0), np.array(g2.xi0)
    return GroupElement(
        lam=g1.lam * g2.lam,
        x0=g1.lam * x02 + x01,
        xi0=xi2 + g2.lam * xi1,
        gamma0=g1.gamma0 + g2.gamma0 + float(x02 @ xi1),
    )


def inverse(g: GroupElement) -> GroupElement:
    x0, xi = np.array(g.x0), np.array(g.xi0)
    return GroupElement(1.0 / g.lam, -x0 / g.lam, -xi / g.lam,
                        -g.gamma0 + float(x0 @ xi) / g.lam)


def _check_lambda(lam: float):
    lo, hi = LAMBDA_RANGE
    if not lo <= lam <= hi:
        raise ValueError(f"dilation {lam:g} outside the per-application range [{lo}, {hi}]; "
                         "compose smaller steps")


def dilate(f: ComplexField, lam: float) -> np.ndarray:
    """Samples of ``f(lam x)`` about the box centre, without the amplitude factor.

    For ``lam > 1`` the stretched lattice leaves the box; those points read
    zero instead of a periodic image.
    """
    if lam == 1.0:
        return np.array(f.samples)
    g = f.grid
    y = lam * g.axis
    inside = np.abs(y) < g.L
    vals = resample_tensor(f, [np.where(inside, y, 0.0)] * g.d)
    if not np.all(inside):
        mask = inside
        for _ in range(g.d - 1):
            mask = np.multiply.outer(mask, inside)
        vals = vals * mask
    return vals


def _plane_wave(f: ComplexField, xi) -> np.ndarray:
    return np.exp(1j * sum(c * k for c, k in zip(f.grid.coords, xi)))


def apply_group(g: GroupElement, f: ComplexField) -> ComplexField:
    if g.d != f.grid.d:
        raise ValueError("group element and field dimensions differ")
    _check_lambda(g.lam)
    vals = f.samples
    if any(g.x0):
        vals = fourier_shift(f, g.x0)
    vals = dilate(f.replace(vals), g.lam)
    factor = g.lam ** (f.grid.d / 2) * np.exp(1j * g.gamma0)
    if any(g.xi0):
        vals = vals * _plane_wave(f, g.xi0)
    return f.replace(factor * vals)


def galilean_boost(f: ComplexField, xi0, t: float = 0.0) -> ComplexField:
    """``exp(i (xi0/2).(x - (xi0/2) t)) u(t, x - xi0 t)``; the shift wraps periodically."""
    xi0 = np.broadcast_to(np.asarray(xi0, dtype=float), (f.grid.d,))
    vals = f.samples
    if t != 0.0 and np.any(xi0):
        vals = fourier_shift(f, -xi0 * t)
    half = xi0 / 2.0
    phase = _plane_wave(f, half) * np.exp(-1j * float(half @ half) * t)
    return f.replace(vals * phase, t=t)


def pseudoconformal(f: ComplexField, t: float) -> ComplexField:
    """Map a snapshot at time ``s = 1/t`` to ``|t|^(-d/2) conj(u(1/t, x/t)) exp(i|x|^2/4t)``.

    The chirp is measured from the box centre.
    """
    if t == 0:
        raise ValueError("pseudoconformal transform undefined at t = 0")
    lam = 1.0 / abs(t)
    _check_lambda(lam)
    vals = dilate(f, lam)
    if t < 0:
        vals = reflect(vals)
    d = f.grid.d
    vals = lam ** (d / 2) * np.conj(vals) * np.exp(1j * f.grid.r2 / (4.0 * t))
    return f.replace(vals, t=t)
