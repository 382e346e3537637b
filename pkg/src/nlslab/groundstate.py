"""The ground state Q: positive radial solution of ``Delta Q + Q^(1+4/d) = Q``.

Q decays like ``exp(-|x|)``, so on a modest periodic box its images
interact at the ``exp(-L)`` level.  Solves and residuals therefore run on a
padded lattice with the caller's spacing and the result is cut back to the
caller's box; certification numbers refer to the padded lattice.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, SolverError
from .grid import ComplexField, Grid, centered_block, fourier_shift, reflect
from .diagnostics import centroid, grad_sq, potential_term

log = logging.getLogger(__name__)

# Padded half-width targeted by the solver: exp(-40) is below round-off.
PAD_HALF_WIDTH = 40.0
PAD_MAX_SAMPLES = 1 << 22
POSITIVITY_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class GroundState:
    field: ComplexField
    residual: float
    mass: float
    grad_sq: float
    energy: float

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def d(self) -> int:
        return self.field.grid.d

    @property
    def peak(self) -> float:
        return float(np.max(self.field.samples.real))

    @property
    def rms_width(self) -> float:
        """``sqrt(int |x|^2 Q^2 / int Q^2)`` about the box centre."""
        g = self.field.grid
        rho = np.abs(self.field.samples) ** 2
        return float(np.sqrt(np.sum(g.r2 * rho) / np.sum(rho)))


class PohozaevReport(NamedTuple):
    grad_ratio: float
    energy: float


def pad_factor(grid: Grid) -> int:
    f = 1
    while f * grid.L < PAD_HALF_WIDTH and (2 * f * grid.n) ** grid.d <= PAD_MAX_SAMPLES:
        f *= 2
    if f * grid.L < PAD_HALF_WIDTH:
        log.info("ground-state padding capped at x%d (half-width %.3g)", f, f * grid.L)
    return f


def residual_of(samples: np.ndarray, grid: Grid) -> float:
    """Relative L2 residual ``||Delta Q - Q + |Q|^(4/d) Q|| / ||Q||``."""
    lap = np.fft.ifftn(-grid.ksq * np.fft.fftn(samples))
    r = lap - samples + np.abs(samples) ** (4.0 / grid.d) * samples
    return float(np.linalg.norm(r) / np.linalg.norm(samples))


def _certify(padded: np.ndarray, pgrid: Grid, grid: Grid, residual: float) -> GroundState:
    pf = ComplexField(pgrid, padded)
    d = grid.d
    gsq = grad_sq(pf)
    pot = potential_term(pf)
    field = ComplexField(grid, centered_block(padded, grid.n))
    return GroundState(
        field=field,
        residual=residual,
        mass=float(np.sum(np.abs(padded) ** 2) * pgrid.dV),
        grad_sq=gsq,
        energy=0.5 * gsq - d / (2.0 * d + 4.0) * pot,
    )


def closed_form_1d(x):
    """``3^(1/4) sech(2x)^(1/2)``."""
    return 3.0 ** 0.25 / np.sqrt(np.cosh(2.0 * np.asarray(x)))


def ground_state_1d_closed_form(grid: Grid) -> GroundState:
    if grid.d != 1:
        raise ConfigurationError("closed-form ground state exists only for d = 1")
    pgrid = grid.padded(pad_factor(grid))
    q = closed_form_1d(pgrid.axis).astype(np.complex128)
    return _certify(q, pgrid, grid, residual_of(q, pgrid))


def _seed(pgrid: Grid, kind: str) -> np.ndarray:
    r2 = pgrid.r2
    if kind == "gaussian":
        return np.exp(-0.5 * r2)
    if kind == "sech":
        return 1.0 / np.cosh(np.sqrt(r2))
    raise ConfigurationError(f"unknown seed {kind!r}")


def solve_ground_state(grid: Grid, tol: float | None = None, seed: str = "gaussian",
                       max_iter: int = 2000) -> GroundState:
    """Petviashvili iteration for Q.

    ``Q <- M^gamma (1 - Delta)^-1 (|Q|^(4/d) Q)`` with the stabilising factor
    ``M = <(1-Delta)Q, Q> / <|Q|^(4/d) Q, Q>`` and ``gamma = p/(p-1)``,
    ``p = 1 + 4/d``.
    """
    d = grid.d
    if tol is None:
        tol = 1e-10 if d == 1 else 1e-8
    if not 0 < tol <= 1e-4:
        raise ConfigurationError(f"tolerance must lie in (0, 1e-4], got {tol}")
    pgrid = grid.padded(pad_factor(grid))
    p = 1.0 + 4.0 / d
    gamma = p / (p - 1.0)
    shape = pgrid.shape
    kr = [pgrid.k] * (d - 1) + [np.abs(pgrid.k[: pgrid.n // 2 + 1])]
    symbol = 1.0 + sum(np.meshgrid(*[k * k for k in kr], indexing="ij", sparse=True))
    # weights turning half-spectrum sums into full Parseval sums
    wts = np.full(pgrid.n // 2 + 1, 2.0)
    wts[0] = wts[-1] = 1.0
    wts = wts.reshape((1,) * (d - 1) + (-1,))
    q = _seed(pgrid, seed)
    residual = change = np.inf
    for it in range(max_iter):
        qh = sfft.rfftn(q)
        nh = sfft.rfftn(np.abs(q) ** (p - 1.0) * q)
        M = np.sum(wts * symbol * np.abs(qh) ** 2) / np.sum(wts * np.real(np.conj(qh) * nh))
        q_new = M ** gamma * sfft.irfftn(nh / symbol, s=shape)
        change = np.linalg.norm(q_new - q) / np.linalg.norm(q_new)
        q = q_new
        if change < tol:
            residual = residual_of(q, pgrid)
            if residual < tol:
                break
    else:
        raise SolverError(f"Petviashvili iteration did not converge in {max_iter} steps "
                          f"(residual {residual:.3e}, change {change:.3e})", residual)
    log.debug("ground state d=%d converged in %d iterations, residual %.3e", d, it + 1, residual)

    # gauge: centred on the box, positive
    qf = ComplexField(pgrid, q)
    c = centroid(qf)
    if np.max(np.abs(c)) > 1e-13:
        q = fourier_shift(qf, c).real
    q = q * np.sign(q.flat[np.argmax(np.abs(q))])
    q = 0.5 * (q + reflect(q))
    residual = residual_of(q, pgrid)
    gs = _certify(q.astype(np.complex128), pgrid, grid, residual)
    _check_invariants(gs, tol)
    return gs


def _check_invariants(gs: GroundState, tol: float):
    s = gs.field.samples
    if gs.residual >= tol:
        raise SolverError(f"ground-state residual {gs.residual:.3e} exceeds {tol:.1e}",
                          gs.residual)
    # far-field samples carry grid-scale ringing; sign is checked above that floor
    big = np.abs(s) > POSITIVITY_FLOOR * np.abs(s).max()
    if np.any(s.real[big] <= 0):
        raise SolverError("ground state is not positive")
    for ax in range(s.ndim):
        mirrored = np.roll(np.flip(s, axis=ax), 1, axis=ax)
        if np.max(np.abs(mirrored - s)) > 1e-8 * np.abs(s).max():
            raise SolverError(f"ground state not symmetric along axis {ax}")


def pohozaev_report(q: GroundState) -> PohozaevReport:
    """``||grad Q||^2 / ||Q||^2`` (should be d/2) and ``E(Q)`` (should be 0)."""
    return PohozaevReport(q.grad_sq / q.mass, q.energy)
