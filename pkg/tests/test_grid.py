import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import gaussian, l2
from nlslab.errors import ConfigurationError
from nlslab.grid import (ComplexField, Grid, bandlimited_resample, fourier_shift, fourier_truncate,
                         gradient_arrays, inner_product, laplacian, lp_norm, make_grid, mass,
                         reflect, resample_tensor)


@pytest.mark.parametrize("d,n,L", [(4, 16, 1.0), (1, 12, 1.0), (1, 4, 1.0), (1, 16, 0.0),
                                   (1, 16, -2.0), (3, 512, 1.0)])
def test_grid_rejects_invalid_parameters(d, n, L):
    with pytest.raises(ConfigurationError):
        make_grid(d, n, L)


def test_grid_geometry():
    g = Grid(2, 16, 4.0)
    assert g.h == 0.5 and g.shape == (16, 16) and g.dV == 0.25
    assert g.axis[g.n // 2] == 0.0
    assert g.axis[0] == -4.0 and g.axis[-1] == 4.0 - g.h


def test_flat_input_is_axis0_fastest():
    g = Grid(2, 8, 1.0)
    arr = np.arange(64).reshape(8, 8) + 0j
    f = ComplexField(g, arr.ravel(order="F"))
    assert np.array_equal(f.samples, arr)
    assert np.array_equal(f.flat(), arr.ravel(order="F"))


def test_field_rejects_bad_samples():
    g = Grid(1, 8, 1.0)
    with pytest.raises(ConfigurationError):
        ComplexField(g, np.zeros(7))
    with pytest.raises(ConfigurationError):
        ComplexField(g, np.full(8, np.nan))
    f = ComplexField(g, np.zeros(8))
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


def test_field_arithmetic_checks_grids():
    a = ComplexField(Grid(1, 8, 1.0), np.ones(8))
    b = ComplexField(Grid(1, 8, 2.0), np.ones(8))
    with pytest.raises(ConfigurationError):
        a + b
    assert np.allclose((a + a).samples, 2) and np.allclose((2 * a).samples, 2)


def test_spectral_derivatives_of_gaussian():
    g = Grid(1, 256, 12.0)
    x = g.axis
    f = ComplexField(g, np.exp(-x ** 2))
    (dx,) = gradient_arrays(f.samples, g)
    assert np.max(np.abs(dx - (-2 * x * np.exp(-x ** 2)))) < 1e-12
    lap = laplacian(f).samples
    assert np.max(np.abs(lap - (4 * x ** 2 - 2) * np.exp(-x ** 2))) < 1e-11


def test_norms_and_inner_product():
    g = Grid(1, 256, 12.0)
    f = gaussian(g)
    assert mass(f) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert lp_norm(f, np.inf) == pytest.approx(1.0)
    assert lp_norm(f, 2) ** 2 == pytest.approx(mass(f))
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)
    assert inner_product(1j * f, f) == pytest.approx(1j * mass(f))


def test_fourier_truncate_is_a_projection():
    g = Grid(2, 32, 4.0)
    rng = np.random.default_rng(0)
    f = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    p = fourier_truncate(f, 3.0)
    assert np.allclose(fourier_truncate(p, 3.0).samples, p.samples, atol=1e-13)
    assert mass(p) < mass(f)
    assert fourier_truncate(f, 1e3) is f


def test_reflect_matches_negated_coordinates():
    g = Grid(1, 64, 10.0)
    f = np.exp(-(g.axis - 1.0) ** 2)
    assert np.allclose(reflect(f), np.exp(-(g.axis + 1.0) ** 2), atol=1e-15)


def test_resample_reproduces_lattice_points():
    g = Grid(2, 16, 3.0)
    rng = np.random.default_rng(1)
    f = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    vals = resample_tensor(f, [g.axis, g.axis])
    assert np.allclose(vals, f.samples, atol=1e-12)
    pts = np.stack([c.ravel() for c in np.meshgrid(g.axis, g.axis, indexing="ij")], axis=1)
    assert np.allclose(bandlimited_resample(f, pts), f.samples.ravel(), atol=1e-12)


def test_resample_rejects_points_outside_box():
    g = Grid(1, 16, 1.0)
    f = ComplexField(g, np.ones(16))
    with pytest.raises(ValueError):
        bandlimited_resample(f, np.array([1.5]))


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.integers(-5, 5), st.floats(0, 2 * np.pi))
def test_trig_polynomials_resample_exactly(y, k, phase):
    g = Grid(1, 32, np.pi)
    f = ComplexField(g, np.exp(1j * (k * g.axis + phase)))
    val = bandlimited_resample(f, np.array([y]))[0]
    assert abs(val - np.exp(1j * (k * y + phase))) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_fourier_shifts_compose(a, b):
    g = Grid(1, 128, 12.0)
    f = gaussian(g)
    ab = fourier_shift(f.replace(fourier_shift(f, a)), b)
    assert np.max(np.abs(ab - fourier_shift(f, a + b))) < 1e-12
    assert np.max(np.abs(fourier_shift(f, a) - np.exp(-(g.axis + a) ** 2 / 2))) < 1e-12
    assert l2(fourier_shift(f, a), g) == pytest.approx(l2(f.samples, g), rel=1e-12)
