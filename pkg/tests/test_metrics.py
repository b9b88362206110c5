"""Tests for finite measures and the bounded-Lipschitz distance."""
import time

import numpy as np
import pytest
from scipy.optimize import linprog

from thinningpy.exceptions import CapExceededError, InvalidStateError
from thinningpy.initial_data import quantile_init
from thinningpy.kinetic import KineticSolution
from thinningpy.metrics import (
    DiscreteMeasure,
    bl_distance,
    bl_distance_oracle,
    discretize,
    modulus,
    shift_pushforward,
    signed_difference,
)
from thinningpy.particle_system import empirical_measure


def point(x, weight=1.0):
    return DiscreteMeasure.from_atoms([x], [weight])


def random_measure(rng, atoms, grid=False):
    if grid:
        positions = rng.choice(np.arange(0.0, 3.0, 0.25), size=atoms, replace=False)
    else:
        positions = rng.uniform(0.0, 3.0, size=atoms)
    return DiscreteMeasure.from_atoms(positions, rng.uniform(0.0, 1.0 / atoms, size=atoms))


def test_from_atoms_merges_and_sorts():
    measure = DiscreteMeasure.from_atoms([1.0, 0.5, 1.0, 2.0], [0.1, 0.2, 0.3, 0.0])
    np.testing.assert_allclose(measure.atoms, [0.5, 1.0])
    np.testing.assert_allclose(measure.weights, [0.2, 0.4])
    assert measure.cdf(0.75) == pytest.approx(0.2)
    assert measure.cdf(1.0) == pytest.approx(0.6)


@pytest.mark.parametrize(
    "atoms, weights, code",
    [
        ([0.1, 0.2], [1.0], "SHAPE_MISMATCH"),
        ([-0.1], [1.0], "NEGATIVE_ATOM"),
        ([0.1], [-1.0], "NEGATIVE_WEIGHT"),
    ],
)
def test_from_atoms_rejects(atoms, weights, code):
    with pytest.raises(InvalidStateError) as error:
        DiscreteMeasure.from_atoms(atoms, weights)
    assert error.value.code == code


def test_signed_difference_drops_cancelled_atoms():
    mu = DiscreteMeasure.from_atoms([0.0, 1.0], [0.5, 0.5])
    nu = DiscreteMeasure.from_atoms([1.0, 2.0], [0.5, 0.25])
    support, signed = signed_difference(mu, nu)
    np.testing.assert_allclose(support, [0.0, 2.0])
    np.testing.assert_allclose(signed, [0.5, -0.25])


@pytest.mark.parametrize("h", [0.1, 0.5, 1.0, 5.0])
def test_unit_atoms(h):
    expected = min(2.0, h)
    assert bl_distance(point(0.0), point(h)) == pytest.approx(expected, abs=1e-9)
    assert bl_distance_oracle(point(0.0), point(h)) == pytest.approx(expected, abs=1e-9)


def test_named_examples():
    mu = DiscreteMeasure.from_atoms([1.0, 2.0], [0.5, 0.5])
    nu = DiscreteMeasure.from_atoms([1.0, 2.0], [0.25, 0.25])
    assert bl_distance(mu, nu) == pytest.approx(0.5)
    assert bl_distance_oracle(mu, nu) == pytest.approx(0.5)
    assert bl_distance(mu, mu) == 0.0
    assert bl_distance(mu, DiscreteMeasure.empty()) == pytest.approx(1.0)
    assert bl_distance(DiscreteMeasure.empty(), DiscreteMeasure.empty()) == 0.0


def test_matches_vertex_oracle(rng):
    for case in range(1000):
        atoms = 1 + case % 4
        mu = random_measure(rng, atoms, grid=case % 3 == 0)
        nu = random_measure(rng, atoms, grid=case % 3 == 0)
        assert bl_distance(mu, nu) == pytest.approx(bl_distance_oracle(mu, nu), abs=1e-9)


def chain_lp_linprog(mu, nu):
    support, signed = signed_difference(mu, nu)
    size = support.size
    gaps = np.diff(support)
    steps = np.zeros((size - 1, size))
    steps[np.arange(size - 1), np.arange(size - 1)] = -1.0
    steps[np.arange(size - 1), np.arange(1, size)] = 1.0
    result = linprog(
        -signed,
        A_ub=np.vstack([steps, -steps]),
        b_ub=np.concatenate([gaps, gaps]),
        bounds=[(-1.0, 1.0)] * size,
        method="highs",
    )
    assert result.status == 0
    return -result.fun


def test_matches_linprog_on_long_chains(rng):
    for case in range(20):
        size = 300
        positions = np.sort(rng.uniform(0.0, 2.0 + case, size=2 * size))
        mu = DiscreteMeasure.from_atoms(positions[0::2], rng.uniform(0.0, 1.0, size=size))
        nu = DiscreteMeasure.from_atoms(positions[1::2], rng.uniform(0.0, 1.0, size=size))
        expected = chain_lp_linprog(mu, nu)
        assert bl_distance(mu, nu) == pytest.approx(expected, rel=1e-6, abs=1e-6)


def test_large_instance_closed_forms():
    size = 100_000
    atoms = np.linspace(0.0, 1.5, size)
    weights = np.full(size, 1.0 / size)
    mu = DiscreteMeasure.from_atoms(atoms, weights)
    # phi(x) = 0.75 - x is optimal for the shift, phi = 1 for the mass change
    moved = DiscreteMeasure.from_atoms(atoms + 1e-3, weights)
    assert bl_distance(mu, moved) == pytest.approx(1e-3, rel=1e-5)
    assert bl_distance(mu, mu.scaled(0.5)) == pytest.approx(0.5, rel=1e-9)


@pytest.mark.slow
def test_large_instance_runtime(uniform):
    limit, _ = discretize(KineticSolution(uniform), 0.2, 100_000)
    sample = empirical_measure(np.sort(np.random.default_rng(7).uniform(0.0, 0.8, 2000)), 2500)
    bl_distance(sample, limit)
    start = time.perf_counter()
    for _ in range(10):
        bl_distance(sample, limit)
    assert (time.perf_counter() - start) / 10 < 0.5


def test_oracle_size_cap():
    mu = DiscreteMeasure.from_atoms(np.arange(5.0))
    nu = DiscreteMeasure.from_atoms(np.arange(5.0) + 0.5)
    with pytest.raises(CapExceededError):
        bl_distance_oracle(mu, nu)


def test_metric_axioms(rng):
    for _ in range(1000):
        mu, nu, eta = (random_measure(rng, int(rng.integers(1, 12))) for _ in range(3))
        d_mn = bl_distance(mu, nu)
        assert d_mn >= 0.0
        assert d_mn == pytest.approx(bl_distance(nu, mu), abs=1e-9)
        assert d_mn <= bl_distance(mu, eta) + bl_distance(eta, nu) + 1e-9


def test_dominates_test_functions(rng):
    for _ in range(200):
        mu = random_measure(rng, 10)
        nu = random_measure(rng, 10)
        distance = bl_distance(mu, nu)
        center, slope = rng.uniform(0.0, 3.0), rng.uniform(0.0, 0.5)
        for phi in (
            lambda x: 0.25 * np.sin(2.0 * x),
            lambda x: np.clip(1.0 - slope * np.abs(x - center), -0.5, 0.5),
            lambda x: np.full_like(x, -1.0),
        ):
            pairing = mu.pair(phi(mu.atoms)) - nu.pair(phi(nu.atoms))
            assert pairing <= distance + 1e-9


def test_shift_pushforward():
    mu = DiscreteMeasure.from_atoms([0.2, 0.7], [0.5, 0.5])
    shifted = shift_pushforward(mu, 0.5)
    np.testing.assert_allclose(shifted.atoms, [0.2])
    np.testing.assert_allclose(shifted.weights, [0.5])
    assert shift_pushforward(mu, 0.0) is mu
    assert shift_pushforward(mu, 0.2).mass == 0.5
    with pytest.raises(InvalidStateError):
        shift_pushforward(mu, -0.1)


def test_modulus_examples(uniform):
    assert modulus(point(0.3), 0.01) == 1.0
    spaced = DiscreteMeasure.from_atoms(np.arange(10) * 0.2, np.full(10, 0.1))
    assert modulus(spaced, 0.3) == pytest.approx(0.2)
    quantiles = empirical_measure(quantile_init(4, uniform))
    assert modulus(quantiles, 0.25) == pytest.approx(0.25)
    with pytest.raises(InvalidStateError):
        modulus(spaced, 0.0)


def test_shift_is_lipschitz_in_modulus(rng):
    for _ in range(1000):
        mu = random_measure(rng, int(rng.integers(1, 15)))
        h = float(rng.uniform(0.01, 1.5))
        moved = shift_pushforward(mu, h)
        assert bl_distance(mu, moved) <= modulus(mu, h) + mu.mass * h + 1e-12


def test_discretize_uniform(uniform):
    solution = KineticSolution(uniform)
    measure, error = discretize(solution, 0.0, 4)
    np.testing.assert_allclose(measure.atoms, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(measure.weights, 0.25)
    assert error == pytest.approx(0.25)
    _, error = discretize(solution, 0.0, 400)
    assert error == pytest.approx(2.5e-3)
    empty, error = discretize(solution, 1.2, 10)
    assert len(empty) == 0 and error == 0.0


@pytest.mark.parametrize("t", [0.0, 0.3, 1.5])
def test_discretize_mass(t, exponential):
    solution = KineticSolution(exponential)
    measure, error = discretize(solution, t, 1000)
    assert measure.mass == pytest.approx(solution.mass(t))
    assert 0.0 < error < 0.01


def test_discretize_error_certificate(uniform):
    solution = KineticSolution(uniform)
    fine, fine_error = discretize(solution, 0.3, 20_000)
    coarse, coarse_error = discretize(solution, 0.3, 50)
    probe = empirical_measure(np.array([0.1, 0.2, 0.5]), n=10)
    gap = abs(bl_distance(probe, coarse) - bl_distance(probe, fine))
    assert gap <= coarse_error + fine_error
