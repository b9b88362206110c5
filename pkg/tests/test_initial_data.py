"""Tests for the initial data module."""
import math

import numpy as np
import pytest

from thinningpy.exceptions import (
    InvalidDensityError,
    InvalidStateError,
    MissingDensityError,
)
from thinningpy.initial_data import (
    CallableCdf,
    Exponential,
    PiecewiseCdf,
    Uniform01,
    load_piecewise_cdf,
    make_builtin,
    parse_density,
    quantile_init,
)
from thinningpy.metrics import modulus
from thinningpy.particle_system import empirical_measure


def test_uniform_closed_forms(uniform):
    assert uniform.cdf(0.3) == pytest.approx(0.3)
    assert uniform.quantile(0.3) == pytest.approx(0.3)
    assert uniform.cdf(-1.0) == 0.0
    assert uniform.cdf(2.0) == 1.0
    assert uniform.extinction_time() == 1.0


def test_exponential_closed_forms(exponential):
    assert exponential.cdf(math.log(2.0)) == pytest.approx(0.5)
    assert exponential.quantile(0.5) == pytest.approx(math.log(2.0))
    assert exponential.survival(1.0) == pytest.approx(math.exp(-1.0))
    assert math.isinf(exponential.extinction_time())


def test_piecewise_quantile_interpolates():
    density = make_builtin("piecewise_cdf", table=[(0, 0), (1, 0.5), (2, 1)])
    assert density.quantile(0.25) == pytest.approx(0.5)
    assert density.cdf(1.5) == pytest.approx(0.75)
    assert density.quantile(0.0) == 0.0
    assert density.quantile(1.0) == pytest.approx(2.0)


def test_piecewise_plateau_uses_left_inverse():
    density = PiecewiseCdf([0.0, 1.0, 2.0, 3.0], [0.0, 0.5, 0.5, 1.0])
    assert density.quantile(0.5) == pytest.approx(1.0)
    assert density.quantile(0.75) == pytest.approx(2.5)


@pytest.mark.parametrize(
    "xs, fs, code",
    [
        ([0.0, 1.0], [0.0, 0.9], "UNNORMALIZED"),
        ([0.0, 1.0, 0.5], [0.0, 0.5, 1.0], "NON_MONOTONE_TABLE"),
        ([0.0, 1.0, 2.0], [0.0, 0.7, 0.6], "NON_MONOTONE_TABLE"),
        ([0.5, 1.0], [0.0, 1.0], "TABLE_NOT_AT_ORIGIN"),
        ([0.0], [0.0], "BAD_TABLE_SHAPE"),
    ],
)
def test_piecewise_rejects_bad_tables(xs, fs, code):
    with pytest.raises(InvalidDensityError) as error:
        PiecewiseCdf(xs, fs)
    assert error.value.code == code


def test_negative_rate_rejected():
    with pytest.raises(InvalidDensityError):
        Exponential(-1.0)
    with pytest.raises(InvalidDensityError):
        make_builtin("exponential", rate=0.0)


def test_quantile_rejects_out_of_range(uniform):
    with pytest.raises(InvalidStateError):
        uniform.quantile(1.5)


def test_piecewise_has_no_pdf():
    density = PiecewiseCdf([0.0, 1.0], [0.0, 1.0])
    with pytest.raises(MissingDensityError):
        density.pdf(0.5)


@pytest.mark.parametrize("family", ["uniform01", "exponential", "piecewise"])
def test_generalized_inverse_consistency(family):
    density = make_builtin(family, rate=2.0, table=[(0, 0), (0.5, 0.2), (3, 1)])
    levels = np.linspace(0.01, 0.99, 99)
    quantiles = density.quantile(levels)
    assert np.all(np.diff(quantiles) >= 0)
    assert np.all(density.cdf(quantiles) >= levels - 1e-12)
    xs = np.linspace(0.0, 3.0, 50)
    assert np.all(density.quantile(density.cdf(xs)) <= xs + 1e-12)


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_tail_certificate(eps, uniform, exponential):
    for density in (uniform, exponential):
        assert 1.0 - density.cdf(density.tail_certificate(eps)) < eps


def test_uniform_modulus_exact(uniform):
    for h in (0.01, 0.3, 1.0, 2.5):
        assert uniform.continuity_modulus(h) == min(h, 1.0)
        assert uniform.modulus_bounds(h) == (min(h, 1.0), min(h, 1.0))


def test_piecewise_modulus_scans_breakpoints():
    density = PiecewiseCdf([0.0, 1.0, 1.5, 3.0], [0.0, 0.1, 0.9, 1.0])
    # steepest piece has slope 1.6 on [1, 1.5]
    assert density.continuity_modulus(0.25) == pytest.approx(0.4)
    assert density.continuity_modulus(0.5) == pytest.approx(0.8)
    widths = np.linspace(0.05, 3.0, 60)
    values = [density.continuity_modulus(h) for h in widths]
    assert np.all(np.diff(values) >= -1e-12)
    assert max(values) <= 1.0


def test_callable_cdf_matches_exponential():
    density = CallableCdf(
        lambda x: 1.0 - math.exp(-x),
        pdf=lambda x: math.exp(-x),
        name="exp-callable",
        grid_points=20_000,
    )
    assert density.quantile(0.5) == pytest.approx(math.log(2.0), abs=1e-10)
    lower, upper = density.modulus_bounds(0.1)
    exact = -math.expm1(-0.1)
    assert lower <= exact + 1e-12
    assert upper >= exact - 1e-12
    assert upper - lower < 1e-3


def test_callable_cdf_must_be_normalized():
    with pytest.raises(InvalidDensityError):
        CallableCdf(lambda x: 0.5 * min(x, 1.0))


def test_quantile_init_examples(uniform, exponential):
    np.testing.assert_allclose(quantile_init(2, uniform), [0.25, 0.75])
    np.testing.assert_allclose(quantile_init(4, uniform), [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(
        quantile_init(2, exponential), [-math.log(0.75), -math.log(0.25)]
    )


def test_quantile_init_rejects_odd(uniform):
    with pytest.raises(InvalidStateError) as error:
        quantile_init(3, uniform)
    assert error.value.code == "ODD_PARTICLE_COUNT"


@pytest.mark.parametrize("n", [2, 10, 100])
def test_quantile_init_sandwich(n, exponential):
    positions = quantile_init(n, exponential)
    empirical = np.arange(1, n + 1) / n
    truth = exponential.cdf(positions)
    # at each atom, F0 lies halfway up the jump of the empirical CDF
    np.testing.assert_allclose(empirical - truth, 1.0 / (2 * n), atol=1e-12)


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_empirical_modulus_within_one_over_n(n, uniform, exponential):
    for density in (uniform, exponential):
        measure = empirical_measure(quantile_init(n, density))
        for h in np.linspace(0.01, 1.0, 25):
            assert modulus(measure, h) <= density.continuity_modulus(h) + 1.0 / n + 1e-12


def test_rho_continuity_bounded_by_modulus(uniform, exponential):
    for density in (uniform, exponential):
        for t0 in np.linspace(0.0, 2.0, 9):
            for h in (0.01, 0.1, 0.5):
                gap = abs(density.survival(t0 + h) - density.survival(t0))
                assert gap <= density.continuity_modulus(h) + 1e-12


def test_parse_density(tmp_path):
    assert isinstance(parse_density("uniform"), Uniform01)
    assert parse_density("exp:2.5").rate == 2.5
    table = tmp_path / "cdf.txt"
    table.write_text("# x F\n0 0\n1 0.5\n2 1\n")
    density = parse_density(f"file:{table}")
    assert density.quantile(0.25) == pytest.approx(0.5)
    assert load_piecewise_cdf(table).cdf(1.0) == pytest.approx(0.5)
    with pytest.raises(InvalidDensityError):
        parse_density("gamma:2")
    with pytest.raises(InvalidDensityError):
        parse_density("exp:abc")
