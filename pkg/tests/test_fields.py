import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from isothermic.errors import InsufficientSmoothnessError, NonFiniteFieldError, StencilError
from isothermic.fields import (
    DerivativeSource,
    GridSpec,
    ScalarField,
    VectorField,
    agreement_bound,
    constancy_test,
    derivative_agreement,
    differentiate,
    fd_derivative,
    fit_constants,
)
from isothermic.lorentz import E1, E2
from isothermic.models import ConstantProfile, ElasticProfile, PolynomialProfile, SineProfile
from isothermic.profiles import generate


@pytest.fixture
def grid():
    return GridSpec(n=512, u_min=0.0, u_max=1.0)


@pytest.fixture
def periodic_grid():
    return GridSpec(n=512, u_min=0.0, u_max=2 * math.pi, periodic=True)


def test_grid_validation():
    with pytest.raises(ValidationError):
        GridSpec(n=8)
    with pytest.raises(ValidationError, match="u_max must be greater"):
        GridSpec(n=32, u_min=1.0, u_max=1.0)


def test_grid_spacing(grid, periodic_grid):
    assert grid.h == pytest.approx(1.0 / 511)
    assert grid.nodes()[-1] == pytest.approx(1.0)
    assert periodic_grid.h == pytest.approx(2 * math.pi / 512)
    assert periodic_grid.nodes()[-1] < 2 * math.pi


def test_periodic_sine_derivative(periodic_grid):
    u = periodic_grid.nodes()
    f = ScalarField.from_samples(periodic_grid, np.sin(u))
    assert np.max(np.abs(differentiate(f, 1).samples - np.cos(u))) < 1e-7
    assert np.max(np.abs(differentiate(f, 2).samples + np.sin(u))) < 1e-6


def test_constant_field_has_zero_derivatives(grid):
    f = ScalarField.constant(grid, 3.0, order=2)
    assert np.all(differentiate(f, 1).samples == 0.0)
    sampled = ScalarField.from_samples(grid, np.full(grid.n, 3.0))
    assert np.max(np.abs(differentiate(sampled, 1).samples)) < 1e-6


def test_quadratic_second_derivative_including_boundary(grid):
    u = grid.nodes()
    f = ScalarField.from_samples(grid, u**2)
    second = differentiate(f, 2)
    assert second.derivative_source is DerivativeSource.FINITE_DIFFERENCE
    assert np.max(np.abs(second.samples - 2.0)) < 1e-6


def test_differentiate_rejects_high_order(grid):
    f = ScalarField.constant(grid, 1.0)
    with pytest.raises(StencilError):
        differentiate(f, 5)


def test_exhausted_sampled_jet(grid):
    f = ScalarField.from_samples(grid, grid.nodes())
    with pytest.raises(InsufficientSmoothnessError):
        f.derivative(5)


def test_analytic_jet_falls_back_with_warning(grid, caplog):
    f = generate(PolynomialProfile(coefficients=[0.0, 0.0, 0.0, 1.0]), grid, order=1)
    with caplog.at_level(logging.WARNING, logger="isothermic.fields"):
        second = f.derivative(2)
    assert "Analytic jet exhausted" in caplog.text
    assert second.derivative_source is DerivativeSource.FINITE_DIFFERENCE
    assert np.max(np.abs(second.samples - 6 * grid.nodes())) < 1e-6


@pytest.mark.parametrize(
    "profile",
    [
        ConstantProfile(value=2.0),
        SineProfile(offset=2.0, amplitude=1.0, frequency=3.0),
        PolynomialProfile(coefficients=[1.0, -2.0, 0.0, 3.0, 0.5]),
        ElasticProfile(C=1.0, alpha=-3.0, k0=2.2),
        ElasticProfile(C=-1.0, k0=1.2, k1=0.1),
        ElasticProfile(alpha=1.0, k0=1.0, forcing=0.5),
    ],
    ids=["constant", "sine", "polynomial", "elastic-cone", "elastic-revolution", "forced-cylinder"],
)
def test_jet_agrees_with_finite_differences(grid, profile):
    f = generate(profile, grid, order=8)
    agreement = derivative_agreement(f)
    assert set(agreement) == {1, 2, 3, 4}
    for m, value in agreement.items():
        assert value < agreement_bound(f, m), m


def test_agreement_bound_rounding_floor(grid):
    sine = SineProfile(offset=2.0, amplitude=1.0, frequency=3.0)
    f = generate(sine, grid, order=8)
    assert agreement_bound(f, 1) < 1e-6
    assert agreement_bound(f, 4) > 1e-3
    with pytest.raises(InsufficientSmoothnessError):
        agreement_bound(generate(sine, grid, order=4), 1)


def test_leibniz_product(grid):
    u = generate(PolynomialProfile(coefficients=[0.0, 1.0]), grid, order=3)
    square = u * u
    assert np.allclose(square.samples, grid.nodes() ** 2)
    assert np.allclose(square.derivative(1).samples, 2 * grid.nodes())
    assert np.allclose(square.derivative(2).samples, 2.0)
    assert np.allclose(square.derivative(3).samples, 0.0)
    cube = u**3
    assert np.allclose(cube.derivative(2).samples, 6 * grid.nodes())


def test_scalar_arithmetic(grid):
    f = ScalarField.constant(grid, 2.0, order=2)
    assert np.allclose((1.0 - f).samples, -1.0)
    assert np.allclose((f / 4).samples, 0.5)
    assert np.allclose((3 * f + 1).samples, 7.0)


def test_fields_on_different_grids_do_not_mix(grid):
    other = GridSpec(n=64)
    with pytest.raises(ValueError, match="different grids"):
        ScalarField.constant(grid, 1.0) + ScalarField.constant(other, 1.0)


def test_non_finite_samples_rejected(grid):
    samples = np.zeros(grid.n)
    samples[3] = np.nan
    with pytest.raises(NonFiniteFieldError):
        ScalarField.from_samples(grid, samples)
    with pytest.raises(NonFiniteFieldError):
        VectorField(grid, np.full((grid.n, 5), np.inf))


def test_vector_field_never_wraps(periodic_grid):
    u = periodic_grid.nodes()
    line = VectorField(periodic_grid, np.outer(u, E1))
    assert np.max(np.abs(line.differentiate().samples - E1)) < 1e-9


def test_vector_field_scaling(grid):
    v = VectorField.constant(grid, E2)
    scaled = v * ScalarField.constant(grid, 3.0)
    assert np.allclose(scaled.mean(), 3 * E2)
    assert np.allclose((v * 2.0 - v).samples, v.samples)


def test_constancy_values(grid):
    flat = constancy_test(np.full(grid.n, 3.0), 1e-9)
    assert flat.is_constant
    assert flat.value == pytest.approx(3.0)
    assert flat.deviation == pytest.approx(0.0)
    ramp = constancy_test(grid.nodes(), 1e-3)
    assert not ramp.is_constant
    assert ramp.value == pytest.approx(0.5)
    assert ramp.deviation == pytest.approx(0.5)
    with pytest.raises(ValueError):
        constancy_test(grid.nodes(), 0.0)


def test_fit_constants(grid):
    k = 2.0 + np.sin(grid.nodes())
    exact = fit_constants([k], -3.0 * k)
    assert exact.coefficients[0] == pytest.approx(3.0)
    assert exact.residual < 1e-12
    assert not exact.degenerate

    inexact = fit_constants([k], k**2)
    assert inexact.residual > 1e-3


def test_fit_constants_degenerate_basis(grid):
    k = 2.0 + np.sin(grid.nodes())
    fit = fit_constants([k, 2 * k], -k)
    assert fit.degenerate
    assert fit.rank == 1
    assert fit.residual < 1e-10


def test_fd_derivative_matrix_shape(grid):
    u = grid.nodes()
    samples = np.column_stack([u, u**2])
    derivative = fd_derivative(samples, grid, 1)
    assert derivative.shape == (grid.n, 2)
    assert np.allclose(derivative[:, 1], 2 * u, atol=1e-8)
