"""Independent reference computations used by the test-suite.

Nothing here imports the package's solvers: each oracle is a separate,
simple route to the same number.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad, solve_ivp


def townes_shooting(d: int, r_max: float = 12.0, iters: int = 80):
    """Radial ground state by shooting on ``Q(0)``.

    Integrates ``Q'' + (d-1)/r Q' - Q + Q^(1+4/d) = 0`` from ``r = 0`` and
    bisects on the initial height: overshoots cross zero, undershoots turn
    back up.  Returns ``(Q0, mass)`` with the mass integrated up to the
    point where the trajectory leaves the decaying branch.
    """
    p = 1.0 + 4.0 / d
    r0 = 1e-8

    def rhs(r, y):
        q, dq = y
        return [dq, -(d - 1) / r * dq + q - np.abs(q) ** (p - 1) * q]

    def cross(r, y):
        return y[0]
    cross.terminal = True

    def turn(r, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1

    def shoot(a):
        return solve_ivp(rhs, (r0, r_max), [a, 0.0], events=(cross, turn), rtol=1e-12,
                         atol=1e-14, dense_output=True)

    lo, hi = 1.0, 6.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sol = shoot(mid)
        if sol.t_events[0].size:
            hi = mid
        else:
            lo = mid
    a = 0.5 * (lo + hi)
    sol = shoot(a)
    r_end = sol.t[-1]
    area = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[d]
    mass = area * quad(lambda r: sol.sol(r)[0] ** 2 * r ** (d - 1), r0, r_end, limit=400)[0]
    return a, mass, r_end


def free_gaussian(x2, t: float, d: int):
    """Linear Schrodinger evolution of ``exp(-|x|^2/2)``."""
    z = 1.0 + 2j * t
    return z ** (-d / 2) * np.exp(-x2 / (2 * z))


def gaussian_moment_ratio() -> float:
    """``int x^2 e^{-x^2} / int e^{-x^2}`` in one dimension."""
    return 0.5


def chi4_integral(d: int) -> float:
    """``int_{R^d} chi(|x|)^4`` for the quintic smoothstep cutoff."""
    def chi(r):
        s = min(max(r - 1.0, 0.0), 1.0)
        return 1.0 - s ** 3 * (10 - 15 * s + 6 * s * s)
    area = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[d]
    return area * (quad(lambda r: r ** (d - 1), 0, 1)[0]
                   + quad(lambda r: chi(r) ** 4 * r ** (d - 1), 1, 2, epsabs=1e-14)[0])


def pair_sum_morawetz(rho, m, coords, psi, L):
    """``sum_x sum_y rho(y) m(x).(x - y) psi(|x - y|)`` with minimum-image displacements.

    ``coords`` are flattened lattice coordinates of shape ``(N, d)``; the
    caller multiplies by the quadrature weight.
    """
    total = 0.0
    rho = rho.ravel()
    m = m.reshape(len(m), -1).T
    for i in range(coords.shape[0]):
        z = coords[i][None, :] - coords
        z = np.mod(z + L, 2 * L) - L
        r = np.sqrt(np.sum(z * z, axis=1))
        total += np.sum(rho * psi(r) * (z @ m[i]))
    return total
