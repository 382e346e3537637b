"""Conserved quantities, variance and virial, Gagliardo-Nirenberg and the
spacetime scattering norm."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .grid import ComplexField, gradient_arrays, lp_norm


class TailMassWarning(UserWarning):
    """Field mass reaches the outer half of the box; moment integrals are suspect."""


@dataclass
class DiagnosticRecord:
    """One row of diagnostics.  Field order is the CSV column order."""

    t: float
    mass: float
    energy: float
    momentum: tuple
    variance: float
    grad_sq: float
    linf: float
    lam: Optional[float] = None
    x_center: Optional[tuple] = None
    xi: Optional[tuple] = None
    gamma: Optional[float] = None
    spacetime_norm_partial: float = 0.0
    morawetz_value: Optional[float] = None
    fit_distance: Optional[float] = None

    def __post_init__(self):
        if self.mass < 0 or self.variance < 0:
            raise ValueError("mass and variance must be nonnegative")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


class ConservedQuantities(NamedTuple):
    mass: float
    energy: float
    momentum: np.ndarray


class GNReport(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


class VirialReport(NamedTuple):
    max_rel_error: float
    second_differences: np.ndarray
    target: float


def potential_exponent(d: int) -> float:
    return 2.0 + 4.0 / d


def grad_sq(f: ComplexField) -> float:
    return float(sum(np.sum(np.abs(g) ** 2) for g in gradient_arrays(f.samples, f.grid))
                 * f.grid.dV)


def momentum(f: ComplexField) -> np.ndarray:
    """``Im int grad(f) conj(f)``."""
    u = f.samples
    return np.array([np.sum(np.imag(np.conj(u) * g)) * f.grid.dV
                     for g in gradient_arrays(u, f.grid)])


def potential_term(f: ComplexField) -> float:
    """``int |f|^(2+4/d)``."""
    p = potential_exponent(f.grid.d)
    return float(np.sum(np.abs(f.samples) ** p) * f.grid.dV)


def energy(f: ComplexField, mu: int) -> float:
    d = f.grid.d
    return 0.5 * grad_sq(f) + mu * d / (2.0 * d + 4.0) * potential_term(f)


def conserved_quantities(f: ComplexField, mu: int) -> ConservedQuantities:
    return ConservedQuantities(
        mass=float(np.sum(np.abs(f.samples) ** 2) * f.grid.dV),
        energy=energy(f, mu),
        momentum=momentum(f),
    )


def centroid(f: ComplexField) -> np.ndarray:
    rho = np.abs(f.samples) ** 2
    m = rho.sum()
    return np.array([float(np.sum(c * rho) / m) for c in f.grid.coords])


def tail_fraction(f: ComplexField) -> float:
    """Fraction of mass outside the central half-box ``|x_a| < L/2``."""
    rho = np.abs(f.samples) ** 2
    outside = np.zeros(f.grid.shape, dtype=bool)
    for c in f.grid.coords:
        outside = outside | (np.abs(c) >= f.grid.L / 2)
    total = rho.sum()
    return float(rho[outside].sum() / total) if total > 0 else 0.0


def variance(f: ComplexField, center=None, tail_tol: float = 1e-8) -> float:
    """``int |x - center|^2 |f|^2``; warns when the tail condition fails.

    ``center`` defaults to the mass centroid.
    """
    g = f.grid
    if center is None:
        center = centroid(f)
    center = np.broadcast_to(np.asarray(center, dtype=float), (g.d,))
    if tail_fraction(f) > tail_tol:
        warnings.warn("field mass outside the central half-box exceeds "
                      f"{tail_tol:g}; variance is unreliable", TailMassWarning, stacklevel=2)
    w = sum((c - x0) ** 2 for c, x0 in zip(g.coords, center))
    return float(np.sum(w * np.abs(f.samples) ** 2) * g.dV)


def gn_check(f: ComplexField, q_mass: float) -> GNReport:
    """Sharp Gagliardo-Nirenberg ratio; equals 1 exactly at the ground state."""
    d = f.grid.d
    m = float(np.sum(np.abs(f.samples) ** 2) * f.grid.dV)
    if m == 0.0:
        raise ValueError("Gagliardo-Nirenberg ratio undefined for the zero field")
    lhs = potential_term(f)
    rhs = (d + 2.0) / d * (m / q_mass) ** (2.0 / d) * grad_sq(f)
    return GNReport(lhs, rhs, lhs / rhs)


def _record_times(traj) -> np.ndarray:
    return np.array([r.t for r in traj.records])


def virial_check(traj, mu: Optional[int] = None, rtol_uniform: float = 1e-9) -> VirialReport:
    """Central second differences of the recorded variance against ``16 E(u0)``.

    Records must be uniformly spaced in time and carry variances about a
    fixed centre (``run_evolution`` uses the initial centroid).
    """
    t = _record_times(traj)
    if len(t) < 5:
        raise ValueError("virial check needs at least 5 records")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > rtol_uniform * max(1.0, abs(t[-1])):
        raise ValueError("virial check requires uniformly spaced record times")
    V = np.array([r.variance for r in traj.records])
    d2 = (V[2:] - 2 * V[1:-1] + V[:-2]) / dt[0] ** 2
    target = 16.0 * traj.records[0].energy
    scale = abs(target) if target != 0 else 1.0
    return VirialReport(float(np.max(np.abs(d2 - target)) / scale), d2, target)


def scattering_norm_accumulate(traj) -> float:
    """``(int ||u(t)||_p^p dt)^(1/p)`` with ``p = 2(d+2)/d`` on the record grid."""
    snaps = traj.snapshots
    if not snaps:
        return 0.0
    d = snaps[0].grid.d
    p = potential_exponent(d)
    t = np.array([s.t for s in snaps])
    vals = np.array([lp_norm(s, p) ** p for s in snaps])
    total = float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(t))) if len(t) > 1 else 0.0
    return total ** (1.0 / p)
