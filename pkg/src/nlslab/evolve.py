"""Strang split-step integration with diagnostics, modulation tracking and
blowup fitting."""
from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .diagnostics import (DiagnosticRecord, TailMassWarning, centroid, conserved_quantities,
                          grad_sq, potential_exponent, variance)
from .errors import ConfigurationError
from .grid import ComplexField, inner_product, lp_norm, mass
from .symmetry import GroupElement, apply_group

log = logging.getLogger(__name__)

MIN_DT = 1e-12


class Termination(str, enum.Enum):
    HORIZON = "horizon_reached"
    BLOWUP = "blowup_detected"
    UNDERFLOW = "step_underflow"


@dataclass
class EvolutionConfig:
    mu: int
    dt0: float
    t_end: float
    cfl_safety: float = 1.0
    blowup_gradient_factor: float = 20.0
    record_stride: int = 1
    # Records land exactly on multiples of record_dt when set (overrides stride).
    record_dt: Optional[float] = None
    rate_constant: float = 0.1
    nyquist_guard: float = 0.1
    nonlinear: bool = True
    keep_snapshots: bool = True

    def __post_init__(self):
        if self.mu not in (-1, 1):
            raise ConfigurationError(f"mu must be -1 or +1, got {self.mu}")
        if not self.dt0 > 0:
            raise ConfigurationError(f"dt0 must be positive, got {self.dt0}")
        if not self.t_end > 0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigurationError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.blowup_gradient_factor > 1:
            raise ConfigurationError("blowup_gradient_factor must exceed 1")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigurationError(f"record_stride must be an integer >= 1, got {self.record_stride}")
        if self.record_dt is not None and not self.record_dt > 0:
            raise ConfigurationError("record_dt must be positive")
        if not self.rate_constant > 0:
            raise ConfigurationError("rate_constant must be positive")
        if not 0 < self.nyquist_guard <= 1:
            raise ConfigurationError("nyquist_guard must lie in (0, 1]")


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    snapshots: List[ComplexField] = field(default_factory=list)
    records: List[DiagnosticRecord] = field(default_factory=list)
    termination: Termination = Termination.HORIZON
    steps: int = 0

    @property
    def final(self) -> Optional[ComplexField]:
        return self.snapshots[-1] if self.snapshots else None


class _Stepper:
    """Strang step with the kinetic multiplier cached per step size."""

    def __init__(self, grid, mu: int, nonlinear: bool = True):
        self.grid = grid
        self.mu = mu
        self.nonlinear = nonlinear
        self.power = 4.0 / grid.d
        self._dt = None
        self._mult = None

    def multiplier(self, dt: float) -> np.ndarray:
        if dt != self._dt:
            self._mult = np.exp(-1j * self.grid.ksq * dt)
            self._dt = dt
        return self._mult

    def rotate(self, u: np.ndarray, tau: float) -> np.ndarray:
        if not self.nonlinear:
            return u
        return u * np.exp(-1j * self.mu * tau * np.abs(u) ** self.power)

    def step(self, u: np.ndarray, dt: float):
        """Advance raw samples; also returns the spectrum after the kinetic step."""
        u = self.rotate(u, 0.5 * dt)
        uh = np.fft.fftn(u) * self.multiplier(dt)
        u = self.rotate(np.fft.ifftn(uh), 0.5 * dt)
        return u, uh


def strang_step(f: ComplexField, dt: float, mu: int, nonlinear: bool = True) -> ComplexField:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u, _ = _Stepper(f.grid, mu, nonlinear).step(f.samples, dt)
    return f.replace(u, t=f.t + dt)


def _spectral_grad_sq(uh: np.ndarray, grid) -> float:
    # Parseval; the nonlinear phase rotation after the kinetic step is ignored
    return float(np.sum(grid.ksq * np.abs(uh) ** 2) * grid.dV / grid.size)


def _top_octave_fraction(uh: np.ndarray, grid) -> float:
    kmax = np.abs(grid.k)
    high = kmax > 0.5 * grid.nyquist
    mask = np.zeros(grid.shape, dtype=bool)
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = grid.n
        mask = mask | high.reshape(shape)
    p = np.abs(uh) ** 2
    total = p.sum()
    return float(p[mask].sum() / total) if total > 0 else 0.0


def _make_record(f: ComplexField, mu: int, center, q, weights, st_norm: float) -> DiagnosticRecord:
    cq = conserved_quantities(f, mu)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TailMassWarning)
        var = variance(f, center)
    rec = DiagnosticRecord(
        t=f.t, mass=cq.mass, energy=cq.energy, momentum=tuple(cq.momentum),
        variance=var, grad_sq=grad_sq(f), linf=lp_norm(f, np.inf),
        spacetime_norm_partial=st_norm,
    )
    if q is not None and abs(np.sqrt(cq.mass) - np.sqrt(q.mass)) <= 0.1 * np.sqrt(q.mass):
        est = _moment_estimate(f, q)
        rec.lam, rec.x_center, rec.xi = est.lam, est.x0, est.xi0
        try:
            rec.gamma = _phase(est, f, q)
        except ValueError:
            pass
    if weights is not None:
        from .morawetz import interaction_morawetz
        rec.morawetz_value = interaction_morawetz(f, weights)
    return rec


def run_evolution(u0: ComplexField, cfg: EvolutionConfig, q=None, weights=None,
                  center=None) -> Trajectory:
    """Integrate from ``u0.t`` to ``cfg.t_end``.

    ``q`` enables modulation tracking on records, ``weights`` the Morawetz
    value.  Variances are taken about ``center`` (default: the initial
    centroid) so the virial check sees a fixed origin.
    """
    grid = u0.grid
    t0 = u0.t
    if cfg.t_end <= t0:
        raise ConfigurationError(f"t_end {cfg.t_end} must exceed the start time {t0}")
    if center is None:
        center = centroid(u0) if mass(u0) > 0 else np.zeros(grid.d)
    stepper = _Stepper(grid, cfg.mu, cfg.nonlinear)
    p = potential_exponent(grid.d)
    traj = Trajectory()

    def record(f: ComplexField, acc: float):
        traj.times.append(f.t)
        traj.records.append(_make_record(f, cfg.mu, center, q, weights, acc ** (1.0 / p)))
        if cfg.keep_snapshots:
            traj.snapshots.append(f)

    u = np.array(u0.samples)
    t = t0
    acc = 0.0
    lp_prev = np.sum(np.abs(u) ** p) * grid.dV
    g0 = np.sqrt(grad_sq(u0))
    record(u0, acc)
    k_rec = 1
    steps = 0
    while True:
        if t >= cfg.t_end:
            traj.termination = Termination.HORIZON
            break
        amp = float(np.max(np.abs(u)))
        dt = cfg.dt0
        if cfg.nonlinear and amp > 0:
            dt = min(dt, cfg.rate_constant / amp ** (4.0 / grid.d))
        dt *= cfg.cfl_safety
        if dt < MIN_DT:
            traj.termination = Termination.UNDERFLOW
            log.warning("step underflow at t=%.6g (dt=%.3g)", t, dt)
            break
        target = cfg.t_end
        if cfg.record_dt is not None:
            target = min(target, t0 + k_rec * cfg.record_dt)
        land = target - t - dt < 1e-6 * dt
        if land:
            dt = target - t
        u, uh = stepper.step(u, dt)
        steps += 1
        t = target if land else t + dt
        lp = np.sum(np.abs(u) ** p) * grid.dV
        acc += 0.5 * (lp + lp_prev) * dt
        lp_prev = lp

        blown = np.sqrt(_spectral_grad_sq(uh, grid)) > cfg.blowup_gradient_factor * g0 > 0
        occ = _top_octave_fraction(uh, grid)
        if occ > cfg.nyquist_guard:
            log.info("top-octave occupancy %.3f exceeds guard at t=%.6g", occ, t)
            blown = True
        if cfg.record_dt is not None:
            due = t == target
            if t >= t0 + k_rec * cfg.record_dt:
                k_rec += 1
        else:
            due = steps % cfg.record_stride == 0 or t == cfg.t_end
        if due or blown:
            record(ComplexField(grid, u, t), acc)
        if blown:
            traj.termination = Termination.BLOWUP
            break
    traj.steps = steps
    if not cfg.keep_snapshots:
        traj.snapshots.append(ComplexField(grid, u, t))
    return traj


# ---------------------------------------------------------------------------
# modulation tracking

def _moment_estimate(f: ComplexField, q) -> GroupElement:
    """Group element from moments; the phase is left at zero."""
    m = mass(f)
    P = conserved_quantities(f, 1).momentum
    xi = P / m
    gd = grad_sq(f) - float(P @ P) / m
    if gd <= 0:
        raise ValueError("de-boosted gradient vanishes; cannot estimate scale")
    lam = float(np.sqrt(q.grad_sq / gd))
    return GroupElement(lam, centroid(f), -lam * xi, 0.0)


def _phase(g: GroupElement, f: ComplexField, q) -> float:
    return float(-np.angle(inner_product(apply_group(g, f), q.field)))


def track_modulation(f: ComplexField, q) -> GroupElement:
    """Group element ``g`` with ``g f`` close to Q, from moments of ``f``.

    The boost is ``P/M``, the translation is the mass centroid, the scale
    matches ``||grad Q||`` after removing the boost and the phase aligns the
    overlap with Q.
    """
    if abs(np.sqrt(mass(f)) - np.sqrt(q.mass)) > 0.1 * np.sqrt(q.mass):
        raise ValueError("field mass is not within 10% of the ground-state mass")
    g = _moment_estimate(f, q)
    return GroupElement(g.lam, g.x0, g.xi0, _phase(g, f, q))


# ---------------------------------------------------------------------------
# blowup fitting

class BlowupReport(NamedTuple):
    T_est: float
    rate_exponent: float
    prefactor: float
    power_r2: float
    loglog_T: float
    loglog_score: float
    max_dlam_over_lam3: float


def _linfit(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return coef, float(res @ res)


def _fit_T(t, logl, design, lo, hi):
    """Blowup time minimising the residual of a linear fit in log space."""
    def ssr(T):
        x = design(T - t)
        if x is None:
            return np.inf
        return _linfit(x, logl)[1]

    span = hi - lo
    grid = lo + span * np.logspace(-8, 0, 161)
    vals = np.array([ssr(T) for T in grid])
    if not np.any(np.isfinite(vals)):
        return np.nan, np.inf
    i = int(np.nanargmin(vals))
    a = grid[max(i - 1, 0)] if i > 0 else lo + 1e-12 * span
    b = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(ssr, bounds=(a, b), method="bounded", options={"xatol": 1e-13 * span})
    T = res.x if res.fun <= vals[i] else grid[i]
    return float(T), float(min(res.fun, vals[i]))


def _loglog_design(tau):
    if np.any(tau >= 1.0 / np.e) or np.any(tau <= 0):
        return None
    return 0.5 * np.log(tau) - 0.5 * np.log(np.log(np.abs(np.log(tau))))


def fit_blowup_profile(t, lam) -> BlowupReport:
    """Fit ``lam(t)`` to ``c (T - t)^alpha`` and to the log-log ansatz."""
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if len(t) < 20:
        raise ValueError(f"blowup fit needs at least 20 scale samples, got {len(t)}")
    if np.any(np.diff(t) <= 0) or np.any(lam <= 0):
        raise ValueError("times must increase and scales must be positive")
    logl = np.log(lam)
    lo, span = t[-1], t[-1] - t[0]
    sst = float(np.sum((logl - logl.mean()) ** 2))

    T, ssr = _fit_T(t, logl, np.log, lo, lo + 10 * span)
    coef, _ = _linfit(np.log(T - t), logl)
    power_r2 = 1.0 - ssr / sst if sst > 0 else 1.0

    # log-log: slope pinned at 1, only the offset is free
    def ll_ssr(Tc):
        x = _loglog_design(Tc - t)
        if x is None:
            return np.inf
        r = logl - x
        r = r - r.mean()
        return float(r @ r)

    hi_ll = t[0] + 1.0 / np.e
    ll_T, ll_score = np.nan, np.nan
    if hi_ll > lo:
        cands = lo + (hi_ll - lo) * np.logspace(-8, 0, 161)[:-1]
        vals = np.array([ll_ssr(c) for c in cands])
        if np.any(np.isfinite(vals)):
            i = int(np.argmin(vals))
            a = cands[i - 1] if i > 0 else lo + 1e-12 * (hi_ll - lo)
            b = cands[min(i + 1, len(cands) - 1)]
            res = minimize_scalar(ll_ssr, bounds=(a, b), method="bounded")
            ll_T = float(res.x if res.fun <= vals[i] else cands[i])
            ll_score = 1.0 - min(res.fun, vals[i]) / sst if sst > 0 else 1.0

    dl = np.abs(np.gradient(lam, t))
    ratio = float(np.max(dl / lam ** 3))
    log.info("blowup fit: T=%.6g alpha=%.4f R2=%.6f loglog=%.6f max|lam'|/lam^3=%.3g",
             T, coef[1], power_r2, ll_score, ratio)
    return BlowupReport(T, float(coef[1]), float(np.exp(coef[0])), power_r2,
                        ll_T, float(ll_score), ratio)


def scale_history(traj: Trajectory, d: int):
    """Amplitude-based scale ``(||u(0)||_inf / ||u(t)||_inf)^(2/d)``."""
    t = np.array([r.t for r in traj.records])
    a = np.array([r.linf for r in traj.records])
    return t, (a[0] / a) ** (2.0 / d)


def estimate_blowup(traj: Trajectory, d: Optional[int] = None) -> BlowupReport:
    """Fit the scale history of a blowup-flagged trajectory.

    The scale is read from the sup norm, which is free of the chirp that
    biases gradient-based estimates near blowup.
    """
    if traj.termination is not Termination.BLOWUP:
        raise ValueError("trajectory did not terminate with blowup_detected")
    if d is None:
        if traj.snapshots:
            d = traj.snapshots[0].grid.d
        else:
            raise ValueError("dimension unknown: trajectory stores no snapshots")
    t, lam = scale_history(traj, d)
    return fit_blowup_profile(t, lam)
