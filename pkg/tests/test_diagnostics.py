import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import gaussian
from nlslab.diagnostics import (DiagnosticRecord, TailMassWarning, centroid, conserved_quantities,
                                gn_check, scattering_norm_accumulate, variance,
                                virial_check)
from nlslab.evolve import EvolutionConfig, Trajectory, run_evolution
from nlslab.grid import ComplexField, Grid
from nlslab.symmetry import GroupElement, apply_group, galilean_boost


def random_smooth_field(grid, rng, kmax=3.0):
    spec = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spec *= grid.ksq <= kmax ** 2
    u = np.fft.ifftn(spec) * np.exp(-grid.r2 / rng.uniform(1.0, 8.0))
    return ComplexField(grid, u * rng.uniform(0.1, 5.0) / np.max(np.abs(u)))


def test_record_rejects_negative_mass():
    with pytest.raises(ValueError):
        DiagnosticRecord(0.0, -1.0, 0.0, (0.0,), 0.0, 0.0, 0.0)


def test_record_field_order():
    names = DiagnosticRecord.field_names()
    assert names[:7] == ["t", "mass", "energy", "momentum", "variance", "grad_sq", "linf"]
    assert names[-1] == "fit_distance"


@pytest.mark.parametrize("fixture", ["q1", "q2"])
def test_ground_state_energy_vanishes(fixture, request):
    q = request.getfixturevalue(fixture)
    cq = conserved_quantities(q.field, -1)
    assert abs(cq.energy) < 1e-6 * q.grad_sq


def test_real_field_momentum_zero():
    f = gaussian(Grid(2, 32, 6.0), center=[0.3, -0.2])
    assert np.all(np.abs(conserved_quantities(f, 1).momentum) < 1e-14)


def test_plane_wave_momentum():
    g = Grid(2, 64, 10.0)
    k0 = np.array([2 * np.pi / 20 * 3, -2 * np.pi / 20])
    base = gaussian(g, width=1.3)
    f = base.replace(base.samples * np.exp(1j * (k0[0] * g.coords[0] + k0[1] * g.coords[1])))
    P = conserved_quantities(f, 1).momentum
    assert np.allclose(P, k0 * conserved_quantities(base, 1).mass, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_galilean_shift_law(xi):
    g = Grid(2, 64, 12.0)
    f = gaussian(g, k=[0.3, -0.1], amplitude=1.4)
    before = conserved_quantities(f, -1)
    after = conserved_quantities(galilean_boost(f, xi, 0.0), -1)
    assert np.allclose(after.momentum, before.momentum + 0.5 * np.array(xi) * before.mass,
                       atol=1e-10)


def test_gaussian_variance_per_mass():
    f = gaussian(Grid(1, 512, 16.0))
    assert variance(f) / conserved_quantities(f, 1).mass == pytest.approx(0.5, abs=1e-8)


def test_parallel_axis():
    g = Grid(2, 64, 12.0)
    f = gaussian(g, center=[0.4, -0.3])
    s = np.array([1.0, 0.5])
    m = conserved_quantities(f, 1).mass
    c = centroid(f)
    direct = np.sum(((g.coords[0] - s[0]) ** 2 + (g.coords[1] - s[1]) ** 2)
                    * np.abs(f.samples) ** 2) * g.dV
    assert variance(f, s) == pytest.approx(direct, rel=1e-13)
    assert variance(f, s) == pytest.approx(variance(f) + m * np.sum((c - s) ** 2), rel=1e-12)


def test_ground_state_variance_matches_fine_grid(q1w):
    from nlslab.groundstate import solve_ground_state

    fine = solve_ground_state(Grid(1, 2048, 24.0))
    assert variance(q1w.field) == pytest.approx(variance(fine.field), abs=1e-6)


def test_variance_tail_warning():
    f = gaussian(Grid(1, 64, 4.0), width=2.0)
    with pytest.warns(TailMassWarning):
        variance(f)


def test_gn_equality_at_ground_state(q1, q2):
    for q in (q1, q2):
        assert gn_check(q.field, q.mass).ratio == pytest.approx(1.0, abs=1e-5)


def test_gn_strict_for_gaussian(q2):
    assert gn_check(gaussian(q2.grid), q2.mass).ratio < 1.0


def test_gn_scale_invariance(q1w):
    base = gn_check(q1w.field, q1w.mass).ratio
    for lam in (0.7, 1.3):
        f = apply_group(GroupElement(lam, [0.0], [0.0]), q1w.field)
        assert gn_check(f, q1w.mass).ratio == pytest.approx(base, abs=1e-6)


def test_gn_battery(q2):
    rng = np.random.default_rng(12345)
    ratios = [gn_check(random_smooth_field(q2.grid, rng), q2.mass).ratio for _ in range(100)]
    assert max(ratios) <= 1 + 1e-5


def test_gn_zero_field():
    with pytest.raises(ValueError):
        gn_check(ComplexField(Grid(1, 16, 4.0), np.zeros(16)), 1.0)


def _virial_traj(mu, amp):
    g = Grid(2, 128, 16.0)
    f = gaussian(g, amplitude=amp)
    return run_evolution(f, EvolutionConfig(mu=mu, dt0=2.5e-4, t_end=0.2, record_dt=0.02))


def test_virial_focusing_gaussian():
    assert virial_check(_virial_traj(-1, 2.2)).max_rel_error < 0.01


def test_virial_defocusing_positive():
    rep = virial_check(_virial_traj(1, 1.5))
    assert np.all(rep.second_differences > 0)


def test_virial_ground_state(q1w):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TailMassWarning)
        traj = run_evolution(q1w.field, EvolutionConfig(mu=-1, dt0=1e-3, t_end=0.2,
                                                        record_dt=0.02))
    rep = virial_check(traj)
    assert np.max(np.abs(rep.second_differences)) < 1e-4 * q1w.grad_sq


def test_virial_needs_uniform_records():
    g = Grid(1, 64, 8.0)
    traj = run_evolution(gaussian(g), EvolutionConfig(mu=1, dt0=0.01, t_end=0.1))
    traj.records[2].t += 1e-3
    with pytest.raises(ValueError):
        virial_check(traj)


def test_scattering_norm_zero_and_soliton(q1w):
    assert scattering_norm_accumulate(Trajectory()) == 0.0
    g = q1w.grid
    zero = run_evolution(ComplexField(g, np.zeros(g.shape)),
                         EvolutionConfig(mu=1, dt0=0.05, t_end=0.2))
    assert scattering_norm_accumulate(zero) == 0.0
    c = np.sum(np.abs(q1w.field.samples) ** 6) * g.dV
    for T in (0.5, 1.0):
        traj = run_evolution(q1w.field, EvolutionConfig(mu=-1, dt0=1e-3, t_end=T,
                                                        record_stride=50))
        assert scattering_norm_accumulate(traj) == pytest.approx((c * T) ** (1 / 6), rel=1e-5)
        assert traj.records[-1].spacetime_norm_partial == pytest.approx((c * T) ** (1 / 6),
                                                                         rel=1e-5)


def test_scattering_norm_stabilises_for_small_defocusing_data():
    g = Grid(1, 1024, 64.0)
    f = gaussian(g, amplitude=0.3)
    cfg = EvolutionConfig(mu=1, dt0=0.01, t_end=8.0, record_dt=0.25)
    traj = run_evolution(f, cfg)
    vals = np.array([r.spacetime_norm_partial for r in traj.records])
    assert np.all(np.diff(vals) >= 0)
    half = np.searchsorted(traj.times, 4.0)
    late = vals[-1] - vals[half]
    early = vals[half] - vals[0]
    assert late < 0.2 * early
