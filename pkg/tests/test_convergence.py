import numpy as np
import pytest

from conftest import l2
from nlslab.config import seeded_perturbation
from nlslab.convergence import (FitResult, fit_to_ground_state, orbit_residual, pairing_battery,
                                sequential_convergence_experiment, weak_limit_proxy)
from nlslab.errors import ConfigurationError
from nlslab.evolve import EvolutionConfig, run_evolution
from nlslab.grid import Grid, mass
from nlslab.groundstate import solve_ground_state
from nlslab.symmetry import GroupElement, apply_group, compose, inverse


@pytest.fixture(scope="module")
def q():
    return solve_ground_state(Grid(1, 256, 16.0))


def random_element(rng):
    return GroupElement(rng.uniform(0.8, 1.25), rng.uniform(-1, 1, 1), rng.uniform(-1, 1, 1),
                        rng.uniform(-np.pi, np.pi))


def assert_stationary(fit, f, q):
    base = orbit_residual(fit.g, f, q)[0]
    theta = fit.g.as_array()
    for i in range(len(theta) - 1):
        for sgn in (1, -1):
            th = theta.copy()
            th[i] += sgn * 10 * max(fit.step, 1e-12)
            trial = orbit_residual(GroupElement.from_array(th), f, q)[0]
            assert trial >= base - 1e-18


def test_fit_result_validation():
    with pytest.raises(ValueError):
        FitResult(GroupElement.identity(1), -1.0, 0, True)


def test_fit_ground_state_is_identity(q):
    fit = fit_to_ground_state(q.field, q)
    assert fit.converged and fit.distance < 1e-8
    assert fit.g.distance(GroupElement.identity(1)) < 1e-6


def test_fit_round_trip(q1w):
    # the wide box keeps Q's tail negligible after translation and dilation
    q = q1w
    rng = np.random.default_rng(7)
    for _ in range(2):
        g = random_element(rng)
        f = apply_group(inverse(g), q.field)
        fit = fit_to_ground_state(f, q)
        assert fit.converged and fit.distance < 1e-8
        assert np.all(np.abs(fit.g.as_array()[:3] - g.as_array()[:3]) < 1e-6)
        assert fit.g.distance(g) < 1e-6
        assert_stationary(fit, f, q)


def test_fit_noise_floor(q):
    noise = seeded_perturbation(q.grid, 11, 1e-3)
    f = q.field.replace(q.field.samples + noise)
    fit = fit_to_ground_state(f, q)
    assert fit.distance <= 1e-3 + 1e-8
    assert fit.distance >= abs(np.sqrt(mass(f)) - np.sqrt(q.mass))
    assert fit.distance <= np.sqrt(mass(f)) + np.sqrt(q.mass)
    assert_stationary(fit, f, q)


def test_fit_covariance(q):
    noise = seeded_perturbation(q.grid, 5, 1e-2)
    f = q.field.replace(q.field.samples + noise)
    h = GroupElement(1.1, [0.3], [-0.4], 0.5)
    a = fit_to_ground_state(f, q)
    b = fit_to_ground_state(apply_group(h, f), q)
    assert b.distance == pytest.approx(a.distance, abs=1e-8)
    assert compose(b.g, h).distance(a.g) < 1e-4


def test_fit_soliton_phase(q):
    traj = run_evolution(q.field, EvolutionConfig(mu=-1, dt0=1e-4, t_end=1.0, rate_constant=1e9,
                                                  record_stride=10 ** 6))
    fit = fit_to_ground_state(traj.final, q)
    assert fit.distance < 1e-6
    assert np.angle(np.exp(1j * (fit.g.gamma0 + 1.0))) == pytest.approx(0.0, abs=1e-6)


def test_fit_mass_range(q):
    with pytest.raises(ValueError):
        fit_to_ground_state(0.3 * q.field, q)
    with pytest.raises(ConfigurationError):
        fit_to_ground_state(solve_ground_state(Grid(1, 128, 16.0)).field, q)


def _cfg(t_end):
    return EvolutionConfig(mu=-1, dt0=2e-4, t_end=t_end, rate_constant=1e9)


def test_sequential_soliton(q):
    prof = sequential_convergence_experiment(q.field, _cfg(1.0), q, [0.0, 0.5, 1.0])
    assert prof.times == pytest.approx([0.0, 0.5, 1.0])
    assert np.all(prof.distances < 1e-6)


def test_sequential_orbit_point(q):
    g = GroupElement(1.1, [0.5], [0.3], 0.2)
    u0 = apply_group(g, q.field)
    prof = sequential_convergence_experiment(u0, _cfg(1.0), q, [0.0, 0.5, 1.0])
    assert np.all(prof.distances < 1e-5)


@pytest.mark.slow
def test_sequential_perturbed_running_infimum(q):
    u = q.field.samples + seeded_perturbation(q.grid, 0, 1e-2)
    u0 = q.field.replace(u * np.sqrt(q.mass / (np.sum(np.abs(u) ** 2) * q.grid.dV)))
    cfg = EvolutionConfig(mu=-1, dt0=2e-3, t_end=10.0)
    prof = sequential_convergence_experiment(u0, cfg, q, np.linspace(0, 10, 6))
    inf = prof.running_infimum
    assert np.all(np.diff(inf) <= 0) and inf[-1] <= prof.distances[0]


def test_sequential_preconditions(q):
    with pytest.raises(ConfigurationError):
        sequential_convergence_experiment(1.01 * q.field, _cfg(1.0), q, [0.0])
    with pytest.raises(ConfigurationError):
        sequential_convergence_experiment(q.field, EvolutionConfig(mu=1, dt0=1e-3, t_end=1.0),
                                          q, [0.0])


def test_pairing_battery_is_seeded(q):
    a = pairing_battery(q.grid)
    b = pairing_battery(q.grid)
    assert len(a) == 16 and all(np.array_equal(x, y) for x, y in zip(a, b))


def test_weak_proxy_constant_sequence(q):
    rep = weak_limit_proxy([q.field] * 3, q, fit=False)
    assert np.allclose(rep.pairings, 1.0, atol=1e-14)
    assert np.allclose(rep.battery, rep.reference[None, :], atol=1e-14)


def test_weak_proxy_ripple(q):
    g = q.grid
    bump = np.exp(-g.axis ** 2 / 2)
    eps = 0.1
    seq = []
    for k in (2.0, 6.0, 12.0):
        r = bump * np.exp(1j * k * g.axis)
        r *= eps / l2(r, g)
        seq.append(q.field.replace(q.field.samples + r))
    rep = weak_limit_proxy(seq, q, fit=False)
    dev = np.abs(rep.pairings - 1)
    assert dev[-1] < 1e-4 and dev[0] > dev[1] > dev[2]
    assert np.allclose(rep.distances, eps, rtol=1e-12)
