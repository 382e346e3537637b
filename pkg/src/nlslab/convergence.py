"""Fitting snapshots to the ground-state orbit and the sequential-convergence
experiment built on it."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .evolve import EvolutionConfig, _moment_estimate, run_evolution
from .grid import ComplexField, Grid, inner_product, mass
from .symmetry import LAMBDA_RANGE, GroupElement, apply_group

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitResult:
    g: GroupElement
    distance: float
    iterations: int
    converged: bool
    step: float = 0.0

    def __post_init__(self):
        if not self.distance >= 0:
            raise ValueError("distance must be nonnegative")


def _element(theta: np.ndarray, d: int, gamma: float = 0.0) -> GroupElement:
    return GroupElement(np.exp(theta[0]), theta[1:1 + d], theta[1 + d:1 + 2 * d], gamma)


def orbit_residual(g: GroupElement, f: ComplexField, q) -> tuple:
    """``(||e^{i gamma} g f - Q||^2, gamma)`` with the phase chosen optimally."""
    gf = apply_group(GroupElement(g.lam, g.x0, g.xi0, 0.0), f)
    ov = inner_product(gf, q.field)
    gamma = -float(np.angle(ov)) if ov != 0 else 0.0
    diff = gf.samples * np.exp(1j * gamma) - q.field.samples
    return float(np.vdot(diff, diff).real * f.grid.dV), gamma


def _check_mass(f: ComplexField, q, lo: float, hi: float):
    ratio = np.sqrt(mass(f) / q.mass)
    if not lo <= ratio <= hi:
        raise ValueError(f"||f|| / ||Q|| = {ratio:.4g} outside [{lo}, {hi}]")


def fit_to_ground_state(f: ComplexField, q, tol: float = 1e-10, max_iter: int = 20000,
                        init: Optional[GroupElement] = None) -> FitResult:
    """Minimise ``||g f - Q||`` over the group.

    Starts from the moment estimate, then runs a coordinate pattern search
    over ``(log lam, x0, xi0)``: each coordinate is tried at plus and minus
    its step, the first improvement is taken, and all steps halve after a
    sweep without improvement.  The phase is solved in closed form.
    """
    if f.grid != q.grid:
        raise ConfigurationError("field and ground state live on different grids")
    _check_mass(f, q, 0.5, 2.0)
    d = f.grid.d
    g0 = init if init is not None else _moment_estimate(f, q)
    lo, hi = np.log(LAMBDA_RANGE[0]), np.log(LAMBDA_RANGE[1])
    theta = np.concatenate([[np.log(g0.lam)], g0.x0, g0.xi0])
    theta[0] = np.clip(theta[0], lo, hi)

    def objective(th):
        if not lo <= th[0] <= hi:
            return np.inf, 0.0
        return orbit_residual(_element(th, d), f, q)

    best, gamma = objective(theta)
    width = q.rms_width / np.sqrt(d)
    step = np.concatenate([[0.1], np.full(d, 0.1 * width), np.full(d, 0.1 / width)])
    it = 0
    while np.max(step) > tol and it < max_iter:
        it += 1
        improved = False
        for i in range(len(theta)):
            for sgn in (1.0, -1.0):
                trial = theta.copy()
                trial[i] += sgn * step[i]
                val, gam = objective(trial)
                if val < best:
                    theta, best, gamma = trial, val, gam
                    improved = True
                    break
        if not improved:
            step *= 0.5
    converged = bool(np.max(step) <= tol)
    if not converged:
        log.warning("orbit fit stopped after %d sweeps with step %.3g", it, np.max(step))
    return FitResult(_element(theta, d, gamma), float(np.sqrt(max(best, 0.0))), it, converged,
                     float(np.max(step)))


@dataclass
class ConvergenceProfile:
    times: List[float] = field(default_factory=list)
    fits: List[FitResult] = field(default_factory=list)

    @property
    def distances(self) -> np.ndarray:
        return np.array([r.distance for r in self.fits])

    @property
    def running_infimum(self) -> np.ndarray:
        return np.minimum.accumulate(self.distances) if self.fits else np.array([])

    def pairs(self):
        return list(zip(self.times, self.fits))


def sequential_convergence_experiment(u0: ComplexField, cfg: EvolutionConfig, q,
                                      sample_times: Sequence[float]) -> ConvergenceProfile:
    """Evolve at threshold mass and fit to the ground-state orbit at each sample time."""
    if cfg.mu != -1:
        raise ConfigurationError("the convergence experiment is defined for mu = -1")
    if abs(np.sqrt(mass(u0) / q.mass) - 1.0) > 1e-8:
        raise ConfigurationError("initial data must carry the ground-state mass (renormalise first)")
    times = sorted(float(t) for t in sample_times)
    if times and times[0] < u0.t:
        raise ConfigurationError("sample times precede the initial time")
    prof = ConvergenceProfile()
    u = u0
    prev = None
    for t in times:
        if t > u.t:
            seg = EvolutionConfig(**{**cfg.__dict__, "t_end": t, "keep_snapshots": False,
                                     "record_dt": None, "record_stride": 1 << 30})
            traj = run_evolution(u, seg)
            u = traj.final
            if traj.termination.value != "horizon_reached":
                log.warning("evolution stopped at t=%.6g (%s)", u.t, traj.termination.value)
                break
        fit = fit_to_ground_state(u, q, init=prev)
        prev = fit.g
        prof.times.append(u.t)
        prof.fits.append(fit)
        log.info("t=%.6g distance=%.6e", u.t, fit.distance)
    return prof


class WeakPairingReport(NamedTuple):
    pairings: np.ndarray
    battery: np.ndarray
    distances: np.ndarray
    reference: np.ndarray


def pairing_battery(grid: Grid, count: int = 16, seed: int = 0) -> List[np.ndarray]:
    """Gaussian wave packets with seeded centres and frequencies."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.uniform(-2.0, 2.0, grid.d)
        k = rng.uniform(-2.0, 2.0, grid.d)
        width = rng.uniform(0.5, 1.5)
        arg = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c)) / (2 * width ** 2)
        phase = sum(x * ki for x, ki in zip(grid.coords, k))
        out.append(np.exp(-arg + 1j * phase))
    return out


def weak_limit_proxy(f_sequence: Sequence[ComplexField], q, fit: bool = True) -> WeakPairingReport:
    """Pairings of the aligned fields ``g_n f_n`` with Q and a 16-function battery.

    A proxy for weak convergence: values are reported, nothing is asserted.
    """
    grid = q.grid
    battery = pairing_battery(grid)
    qn = q.field.samples
    ref = np.array([grid.dV * np.vdot(b, qn) for b in battery])
    pairings, bat, dists = [], [], []
    for f in f_sequence:
        if fit:
            res = fit_to_ground_state(f, q)
            gf = apply_group(res.g, f)
        else:
            gf = f
        pairings.append(inner_product(gf, q.field) / q.mass)
        bat.append([grid.dV * np.vdot(b, gf.samples) for b in battery])
        dists.append(np.sqrt(mass(gf - q.field)))
    report = WeakPairingReport(np.array(pairings), np.array(bat), np.array(dists), ref)
    log.info("weak pairing proxy: %s", np.array2string(report.pairings.real, precision=6))
    return report
