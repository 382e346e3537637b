"""Interaction Morawetz weights, functional and its time derivative.

The cutoff ``chi`` is the quintic smoothstep.  With ``X = chi**2`` the
weight ``phi(r) = Phi(r/R)`` where ``Phi = X * X`` (self-convolution in
``R^d``) does not depend on ``R``, and ``psi(r) = Psi(r/R)`` with
``Psi(p) = p^-1 int_0^p Phi``.  ``Phi`` is tabulated once per dimension by
Gauss-Legendre quadrature and stored as a C2 quintic Hermite interpolant;
every other radial function (derivatives, ``Psi`` and its derivatives) is
derived from that single piecewise polynomial, so the kernels entering
``M`` and ``dM/dt`` are mutually consistent and scale exactly with ``R``.

Kernels act through the minimum-image displacement lattice: pair integrals
``int int a(x) b(y) K(x - y)`` become circular convolutions evaluated by FFT.
A direct pair sum over the same lattice serves as an oracle on small grids.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import BPoly

from .diagnostics import potential_exponent
from .errors import ConfigurationError, UnsupportedModeError
from .grid import ComplexField, Grid, fourier_truncate, gradient_arrays
from .evolve import _Stepper

log = logging.getLogger(__name__)

DIRECT_MAX_SAMPLES = 4096
# Profile support in units of R: phi vanishes beyond 4R.
SUPPORT = 4.0


# ---------------------------------------------------------------------------
# cutoff profile

def chi(r):
    r = np.asarray(r, dtype=float)
    s = np.clip(r - 1.0, 0.0, 1.0)
    return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


def chi_prime(r):
    s = np.clip(np.asarray(r, dtype=float) - 1.0, 0.0, 1.0)
    return -30.0 * s * s * (1.0 - s) ** 2


def chi_second(r):
    r = np.asarray(r, dtype=float)
    s = np.clip(r - 1.0, 0.0, 1.0)
    out = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    return np.where((r > 1.0) & (r < 2.0), out, 0.0)


def _X(r):
    return chi(r) ** 2


def _dX(r):
    return 2.0 * chi(r) * chi_prime(r)


def _lapX(r, d):
    r = np.asarray(r, dtype=float)
    d2 = 2.0 * chi_prime(r) ** 2 + 2.0 * chi(r) * chi_second(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = np.where(r > 1.0, _dX(r) / r, 0.0)
    return d2 + (d - 1) * rad


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in ``R^d``."""
    return {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[d]


# ---------------------------------------------------------------------------
# radial quadrature of Phi = X * X

def _gl(m: int):
    return np.polynomial.legendre.leggauss(m)


def _pieces(lo, hi, cuts):
    pts = np.unique(np.clip(np.concatenate([[lo, hi], np.asarray(cuts, dtype=float)]), lo, hi))
    return pts[:-1], pts[1:]


def _map_nodes(a, b, x, w):
    a = np.asarray(a)[..., None]
    b = np.asarray(b)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _conv_1d(rho: float, m: int):
    x, w = _gl(m)
    a, b = _pieces(-2.0, 2.0, [-1.0, 1.0, rho - 2, rho - 1, rho, rho + 1, rho + 2])
    t, wt = _map_nodes(a, b, x, w)
    t, wt = t.ravel(), wt.ravel()
    rp = np.abs(rho - t)
    c = np.sign(rho - t)
    base = _X(np.abs(t)) * wt
    return np.array([base @ _X(rp), base @ (_dX(rp) * c), base @ _lapX(rp, 1)])


def _conv_polar(rho: float, d: int, m: int):
    x, w = _gl(m)
    a, b = _pieces(0.0, 2.0, [1.0, abs(rho - 1), rho + 1, abs(rho - 2), rho + 2])
    s, ws = _map_nodes(a, b, x, w)
    s, ws = s.ravel(), ws.ravel()
    if rho > 0:
        th = []
        for c in (1.0, 2.0):
            cos_c = (s * s + rho * rho - c * c) / (2.0 * s * rho)
            th.append(np.arccos(np.clip(cos_c, -1.0, 1.0)))
        edges = np.stack([np.zeros_like(s), th[0], th[1], np.full_like(s, np.pi)], axis=1)
    else:
        edges = np.tile(np.array([0.0, 0.5 * np.pi, 0.5 * np.pi, np.pi]), (len(s), 1))
    theta, wth = _map_nodes(edges[:, :-1], edges[:, 1:], x, w)  # (S, 3, m)
    S = s[:, None, None]
    cth = np.cos(theta)
    rp = np.sqrt(np.maximum(S * S + rho * rho - 2.0 * S * rho * cth, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(rp > 0, (rho - S * cth) / rp, 0.0)
    ang = sphere_area(d - 1) * np.sin(theta) ** (d - 2) * wth
    base = (_X(s) * s ** (d - 1) * ws)[:, None, None] * ang
    return np.array([np.sum(base * _X(rp)), np.sum(base * _dX(rp) * c),
                     np.sum(base * _lapX(rp, d))])


def _conv_values(rho: float, d: int, m: int = 32) -> np.ndarray:
    """``(Phi, Phi', Laplacian Phi)`` at ``rho`` by direct quadrature."""
    if d == 1:
        return _conv_1d(rho, m)
    return _conv_polar(rho, d, m)


@dataclass(frozen=True)
class RadialProfile:
    """``Phi`` and ``Psi`` in units of ``R`` for one dimension."""

    d: int
    spacing: float
    poly: BPoly = field(repr=False)
    antider: BPoly = field(repr=False)
    integral: float

    def Phi(self, p, nu: int = 0):
        p = np.asarray(p, dtype=float)
        inside = p < SUPPORT
        return np.where(inside, self.poly(np.minimum(p, SUPPORT), nu), 0.0)

    def lap_Phi(self, p):
        p = np.asarray(p, dtype=float)
        d2 = self.Phi(p, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            rad = np.where(p > 0, self.Phi(p, 1) / p, d2)
        return d2 + (self.d - 1) * rad

    def _A(self, p):
        return np.where(p < SUPPORT, self.antider(np.minimum(p, SUPPORT)), self.integral)

    def Psi_all(self, p):
        """``(Psi, Psi', Psi'')`` at radii ``p``."""
        shape = np.shape(p)
        p = np.atleast_1d(np.asarray(p, dtype=float))
        small = p < self.spacing
        ps = np.where(small, self.spacing, p)
        psi = self._A(ps) / ps
        dpsi = (self.Phi(ps) - psi) / ps
        d2psi = (self.Phi(ps, 1) - 2.0 * dpsi) / ps
        if np.any(small):
            # first Hermite piece is one polynomial: integrate its Taylor series
            coef = np.array([self.poly(0.0, k) for k in range(6)]) / np.array([1, 1, 2, 6, 24, 120])
            q = p[small]
            k = np.arange(6)
            powers = q[:, None] ** k
            psi[small] = powers @ (coef / (k + 1))
            dpow = np.where(k > 0, k * q[:, None] ** np.maximum(k - 1, 0), 0.0)
            dpsi[small] = dpow @ (coef / (k + 1))
            d2pow = np.where(k > 1, k * (k - 1) * q[:, None] ** np.maximum(k - 2, 0), 0.0)
            d2psi[small] = d2pow @ (coef / (k + 1))
        return psi.reshape(shape), dpsi.reshape(shape), d2psi.reshape(shape)

    def lap_Psi(self, p):
        p = np.asarray(p, dtype=float)
        _, d1, d2 = self.Psi_all(p)
        with np.errstate(divide="ignore", invalid="ignore"):
            rad = np.where(p > 0, d1 / p, d2)
        return d2 + (self.d - 1) * rad


@lru_cache(maxsize=None)
def radial_profile(d: int, spacing: float = 1.0 / 128) -> RadialProfile:
    nodes = np.linspace(0.0, SUPPORT, int(round(SUPPORT / spacing)) + 1)
    vals = np.array([_conv_values(p, d) for p in nodes[:-1]])
    vals = np.vstack([vals, np.zeros(3)])
    phi, dphi, lap = vals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = np.where(nodes > 0, lap - (d - 1) * dphi / nodes, lap / d)
    d2[0] = lap[0] / d
    dphi[0] = 0.0
    poly = BPoly.from_derivatives(nodes, np.column_stack([phi, dphi, d2]))
    anti = poly.antiderivative()
    prof = RadialProfile(d, nodes[1] - nodes[0], poly, anti, float(anti(SUPPORT)))
    log.debug("radial profile d=%d: Phi(0)=%.12g, int Phi=%.12g", d, phi[0], prof.integral)
    return prof


# ---------------------------------------------------------------------------
# weights

@dataclass(eq=False)
class MorawetzWeights:
    R: float
    grid: Grid
    profile: RadialProfile = field(repr=False)
    r_table: np.ndarray = field(repr=False)
    phi_table: np.ndarray = field(repr=False)
    psi_table: np.ndarray = field(repr=False)
    lap_psi_max: float = 0.0

    @property
    def d(self) -> int:
        return self.grid.d

    chi = staticmethod(chi)

    # radial functions in physical units
    def phi(self, r):
        return self.profile.Phi(np.asarray(r) / self.R)

    def dphi(self, r):
        return self.profile.Phi(np.asarray(r) / self.R, 1) / self.R

    def lap_phi(self, r):
        return self.profile.lap_Phi(np.asarray(r) / self.R) / self.R ** 2

    def _trunc(self, r, v):
        return np.where(np.asarray(r) < self.grid.L, v, 0.0)

    def psi_parts(self, r):
        """``(psi, psi', psi'/r, Laplacian psi)``, truncated at ``r >= L``."""
        r = np.asarray(r, dtype=float)
        p = r / self.R
        psi, d1, d2 = self.profile.Psi_all(p)
        with np.errstate(divide="ignore", invalid="ignore"):
            over_r = np.where(p > 0, d1 / p, d2) / self.R ** 2
        lap = d2 + (self.d - 1) * over_r * self.R ** 2
        return (self._trunc(r, psi), self._trunc(r, d1 / self.R), self._trunc(r, over_r),
                self._trunc(r, lap / self.R ** 2))

    def psi(self, r):
        return self.psi_parts(r)[0]

    def lap_psi(self, r):
        return self.psi_parts(r)[3]

    # kernels sampled on the displacement lattice
    @cached_property
    def displacement(self) -> tuple:
        z = np.fft.fftfreq(self.grid.n) * self.grid.n * self.grid.h
        return tuple(np.meshgrid(*([z] * self.d), indexing="ij", sparse=True))

    @cached_property
    def kernels(self) -> dict:
        return _radial_kernels(self, self.displacement)

    @cached_property
    def kernel_ffts(self) -> dict:
        return {k: np.fft.fftn(v) for k, v in self.kernels.items()}


def _radial_kernels(w: MorawetzWeights, z) -> dict:
    """Every kernel entering M and dM/dt evaluated at displacements ``z``."""
    d = w.d
    r = np.sqrt(sum(c * c for c in z))
    psi, dpsi, over_r, lap_psi = w.psi_parts(r)
    out = {}
    for j in range(d):
        out[("w", j)] = z[j] * psi
        for k in range(j, d):
            zz = z[j] * z[k]
            out[("K", j, k)] = zz * over_r + (psi if j == k else 0.0)
            out[("P", j, k)] = over_r * (zz - (r * r if j == k else 0.0))
    out["mass"] = w.lap_phi(r) + (d - 1) * lap_psi
    out["nonlin"] = d * psi + r * dpsi
    return {k: np.broadcast_to(v, r.shape) for k, v in out.items()}


def build_weights(R: float, grid: Grid) -> MorawetzWeights:
    """Weights for localisation radius ``R``; requires ``4h <= R`` and ``4R <= L``."""
    h = grid.h
    if not (R >= 4 * h * (1 - 1e-12) and 4 * R <= grid.L * (1 + 1e-12)):
        raise ConfigurationError(
            f"R={R:g} outside [4h, L/4] = [{4 * h:g}, {grid.L / 4:g}]")
    spacing = 1.0 / 128
    while spacing * R > h / 2:
        spacing /= 2
    prof = radial_profile(grid.d, spacing)
    step = spacing * R
    r = np.arange(0.0, grid.L + 0.5 * step, step)
    w = MorawetzWeights(R=float(R), grid=grid, profile=prof, r_table=r,
                        phi_table=np.asarray(prof.Phi(r / R)), psi_table=None)
    psi, _, _, lap = w.psi_parts(r)
    w.psi_table = psi
    w.lap_psi_max = float(np.max(np.abs(lap)))
    _verify_weights(w)
    log.info("Morawetz weights R=%g d=%d: max|lap psi|*R^2 = %.6g", R, grid.d,
             w.lap_psi_max * R * R)
    return w


def _verify_weights(w: MorawetzWeights):
    r, phi, psi = w.r_table, w.phi_table, w.psi_table
    phi0 = phi[0]
    tol = 1e-12 * phi0
    inside = r < w.grid.L
    problems = []
    if np.any(phi[r >= SUPPORT * w.R] != 0.0):
        problems.append("phi does not vanish beyond 4R")
    if np.any(np.diff(phi) > tol):
        problems.append("phi is not nonincreasing")
    if np.any(np.diff(psi[inside]) > tol):
        problems.append("psi is not nonincreasing")
    if abs(psi[0] - phi0) > 1e-12 * phi0:
        problems.append("psi(0) differs from phi(0)")
    if np.any(r * psi > w.profile.integral * w.R * (1 + 1e-12)):
        problems.append("r psi(r) exceeds int phi")
    if np.any(phi[r <= w.R] < 0.5 * phi0):
        problems.append("phi drops below phi(0)/2 inside r <= R")
    if problems:
        raise ConfigurationError("Morawetz weight invariants violated: " + "; ".join(problems))


# ---------------------------------------------------------------------------
# functional and time derivative

def _densities(f: ComplexField):
    u = f.samples
    grads = gradient_arrays(u, f.grid)
    rho = np.abs(u) ** 2
    m = [np.imag(np.conj(u) * g) for g in grads]
    return u, grads, rho, m


def _conv(a: np.ndarray, kfft: np.ndarray, dV: float) -> np.ndarray:
    return np.real(np.fft.ifftn(np.fft.fftn(a) * kfft)) * dV


def _check_weights(f: ComplexField, w: MorawetzWeights):
    if f.grid != w.grid:
        raise ConfigurationError(f"weights built on {w.grid}, field lives on {f.grid}")


def interaction_morawetz(f: ComplexField, w: MorawetzWeights, cutoff: Optional[float] = None,
                         method: str = "spectral") -> float:
    """``M = int int |Iu(y)|^2 Im(conj(Iu) grad Iu)(x) . (x - y) psi(|x - y|)``."""
    _check_weights(f, w)
    if cutoff is not None:
        f = fourier_truncate(f, cutoff)
    _, _, rho, m = _densities(f)
    dV = f.grid.dV
    if method == "direct":
        return _pair_sum(w, [(m[j], rho, ("w", j), 1.0) for j in range(w.d)])
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    kf = w.kernel_ffts
    return float(sum(np.sum(m[j] * _conv(rho, kf[("w", j)], dV)) for j in range(w.d)) * dV)


class MorawetzRHS(NamedTuple):
    gradient: float
    momentum: float
    mass: float
    nonlinear: float
    angular: float

    @property
    def total(self) -> float:
        return self.gradient + self.momentum + self.mass + self.nonlinear

    @property
    def scale(self) -> float:
        return abs(self.gradient) + abs(self.momentum) + abs(self.mass) + abs(self.nonlinear)


def _rhs_pairs(f: ComplexField, mu: int):
    """Pair-sum specs ``(a(x), b(y), kernel, coefficient)`` for each term."""
    d = f.grid.d
    u, grads, rho, m = _densities(f)
    G = {}
    for j in range(d):
        for k in range(j, d):
            G[j, k] = np.real(np.conj(grads[j]) * grads[k]) * (1.0 if j == k else 2.0)
    gradient = [(G[j, k], rho, ("K", j, k), 2.0) for (j, k) in G]
    momentum = [(m[j], m[k], ("K", j, k), -2.0) for j in range(d) for k in range(d)]
    mass = [(rho, rho, "mass", -0.5)]
    pot = np.abs(u) ** potential_exponent(d)
    nonlinear = [(pot, rho, "nonlin", mu * 2.0 / (d + 2.0))]
    angular = ([(G[j, k], rho, ("P", j, k), 2.0) for (j, k) in G]
               + [(m[j], m[k], ("P", j, k), -2.0) for j in range(d) for k in range(d)])
    return gradient, momentum, mass, nonlinear, angular


def _canon(key):
    if isinstance(key, tuple) and key[0] in ("K", "P"):
        return (key[0], min(key[1:]), max(key[1:]))
    return key


def morawetz_rhs(f: ComplexField, w: MorawetzWeights, mu: int, cutoff: Optional[float] = None,
                 method: str = "spectral") -> MorawetzRHS:
    """The bulk terms of ``dM/dt`` with ``I`` the identity.

    ``gradient = 2 int int rho(y) Re(conj(d_j u) d_k u)(x) K_jk(x - y)``,
    ``momentum = -2 int int m_k(y) m_j(x) K_jk``,
    ``mass = -1/2 int int rho rho (Lap phi + (d-1) Lap psi)``,
    ``nonlinear = mu 2/(d+2) int int rho(y) |u(x)|^(2+4/d) (d psi + r psi')``
    with ``K_jk = delta_jk psi + z_j z_k psi'/r``.  ``angular`` is the part
    of the first two terms carried by ``-psi'/r (r^2 delta_jk - z_j z_k)``;
    it is returned for the sign audit and is not part of the total.
    """
    if cutoff is not None:
        raise UnsupportedModeError("dM/dt is implemented only without a frequency cutoff")
    if mu not in (-1, 1):
        raise ConfigurationError(f"mu must be -1 or +1, got {mu}")
    _check_weights(f, w)
    terms = _rhs_pairs(f, mu)
    if method == "direct":
        vals = [_pair_sum(w, [(a, b, _canon(k), c) for a, b, k, c in t]) for t in terms]
    elif method == "spectral":
        kf = w.kernel_ffts
        dV = f.grid.dV
        vals = [float(sum(c * np.sum(a * _conv(b, kf[_canon(k)], dV)) for a, b, k, c in t) * dV)
                for t in terms]
    else:
        raise ValueError(f"unknown method {method!r}")
    out = MorawetzRHS(*vals)
    log.debug("dM/dt terms: gradient=%.6e momentum=%.6e mass=%.6e nonlinear=%.6e angular=%.6e",
              *out)
    if out.angular < 0:
        log.info("angular block negative (%.3e) for truncated weights", out.angular)
    return out


def _pair_sum(w: MorawetzWeights, specs, chunk: int = 256) -> float:
    """``sum_spec c h^2d sum_{x,y} a(x) b(y) K(x - y)`` by brute force."""
    g = w.grid
    if g.size > DIRECT_MAX_SAMPLES:
        raise ConfigurationError(
            f"direct pair sum limited to {DIRECT_MAX_SAMPLES} samples, grid has {g.size}")
    n, d = g.n, g.d
    idx = np.indices(g.shape).reshape(d, -1).T
    total = 0.0
    for start in range(0, len(idx), chunk):
        rows = idx[start:start + chunk]
        m = (rows[:, None, :] - idx[None, :, :] + n // 2) % n - n // 2
        z = tuple(g.h * m[..., a] for a in range(d))
        kern = _radial_kernels(w, z)
        for a, b, key, c in specs:
            av = a.reshape(-1)[start:start + chunk]
            total += c * float(np.sum(av[:, None] * b.reshape(-1)[None, :] * kern[key]))
    return total * g.dV ** 2


class DerivativeCheck(NamedTuple):
    delta: float
    finite_difference: float
    rhs: MorawetzRHS
    error: float
    relative_error: float


def derivative_check(u0: ComplexField, w: MorawetzWeights, mu: int, delta: float,
                     substeps: int = 1) -> DerivativeCheck:
    """Compare ``(M(2 delta) - M(0)) / (2 delta)`` with the rhs at ``t = delta``.

    The states come from Strang steps of size ``delta / substeps``.
    """
    stepper = _Stepper(u0.grid, mu)
    u = np.array(u0.samples)
    states = [u]
    for _ in range(2):
        for _ in range(substeps):
            u, _ = stepper.step(u, delta / substeps)
        states.append(u)
    M0 = interaction_morawetz(u0.replace(states[0]), w)
    M2 = interaction_morawetz(u0.replace(states[2]), w)
    fd = (M2 - M0) / (2.0 * delta)
    rhs = morawetz_rhs(u0.replace(states[1], t=u0.t + delta), w, mu)
    err = abs(fd - rhs.total)
    return DerivativeCheck(delta, fd, rhs, err, err / rhs.scale)


# ---------------------------------------------------------------------------
# localisation

def _window(grid: Grid, center, R: float):
    center = np.broadcast_to(np.asarray(center, dtype=float), (grid.d,))
    if np.any(np.abs(center) + 2.0 * R > grid.L):
        raise ConfigurationError("localisation window leaves the box")
    diff = [c - s for c, s in zip(grid.coords, center)]
    r = np.sqrt(sum(x * x for x in diff))
    return diff, r


def _localized_moments(f: ComplexField, s, R: float):
    diff, r = _window(f.grid, s, R)
    wgt = chi(r / R) ** 2
    u, grads, rho, m = _densities(f)
    dV = f.grid.dV
    return wgt, grads, float(np.sum(wgt * rho) * dV), np.array([np.sum(wgt * mj) * dV for mj in m])


def optimal_galilean_shift(f: ComplexField, s, w: MorawetzWeights) -> np.ndarray:
    """``xi`` with ``int chi^2((y - s)/R) Im(conj(e^{i xi y} f) grad(e^{i xi y} f)) = 0``."""
    _, _, mloc, ploc = _localized_moments(f, s, w.R)
    total = float(np.sum(np.abs(f.samples) ** 2) * f.grid.dV)
    if mloc < 1e-12 * total or mloc == 0.0:
        raise ValueError("local mass under the window is too small to fix a frequency")
    return -ploc / mloc


def localized_momentum(f: ComplexField, s, R: float, xi) -> np.ndarray:
    """``int chi^2 Im(conj(v) grad v)`` with ``v = e^{i x.xi} f``."""
    _, _, mloc, ploc = _localized_moments(f, s, R)
    return ploc + np.asarray(xi, dtype=float) * mloc


def localized_kinetic(f: ComplexField, s, R: float, xi) -> float:
    """``int chi^2((x - s)/R) |grad(e^{i x.xi} f)|^2``."""
    wgt, grads, _, _ = _localized_moments(f, s, R)
    u = f.samples
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (f.grid.d,))
    total = sum(np.sum(wgt * np.abs(g + 1j * k * u) ** 2) for g, k in zip(grads, xi))
    return float(total * f.grid.dV)


def localized_energy(f: ComplexField, center, R: float, xi, mu: int) -> float:
    """Energy of ``chi(|x - center|/R) e^{i x.xi} f``.

    The gradient of the windowed field is formed by the product rule, so the
    plane wave need not be periodic on the box.
    """
    g = f.grid
    diff, r = _window(g, center, R)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), (g.d,))
    u = f.samples
    c = chi(r / R)
    with np.errstate(divide="ignore", invalid="ignore"):
        dc = np.where(r > 0, chi_prime(r / R) / (R * r), 0.0)
    grads = gradient_arrays(u, g)
    kin = sum(np.sum(np.abs(dc * x * u + c * (gr + 1j * k * u)) ** 2)
              for x, gr, k in zip(diff, grads, xi))
    pot = np.sum(np.abs(c * u) ** potential_exponent(g.d))
    return float((0.5 * kin + mu * g.d / (2.0 * g.d + 4.0) * pot) * g.dV)


# ---------------------------------------------------------------------------
# rapid cascade bookkeeping

def cascade_ratio_from(times, lam) -> float:
    """``int lam^3 dt / sup lam`` by the trapezoidal rule."""
    t = np.asarray(times, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("need at least two increasing times")
    integral = float(np.sum(0.5 * (lam[1:] ** 3 + lam[:-1] ** 3) * np.diff(t)))
    return integral / float(np.max(lam))


def cascade_ratio(traj) -> float:
    lam = [r.lam for r in traj.records]
    if any(v is None for v in lam):
        raise ValueError("trajectory lacks tracked scale data")
    ratio = cascade_ratio_from([r.t for r in traj.records], lam)
    log.info("cascade ratio %.6g over [%g, %g]", ratio, traj.records[0].t, traj.records[-1].t)
    return ratio
