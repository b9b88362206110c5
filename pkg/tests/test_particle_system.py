"""Tests for the event-driven particle simulation."""
from collections import Counter

import numpy as np
import pytest

from thinningpy.exceptions import InvalidStateError
from thinningpy.initial_data import quantile_init
from thinningpy.kinetic import KineticSolution
from thinningpy.metrics import bl_distance, shift_pushforward
from thinningpy.particle_system import (
    LossPath,
    Trajectory,
    empirical_measure,
    loss_path,
    simulate,
    snapshot_empirical,
    sup_loss_deviation,
)
from thinningpy.stats import chi_square_pvalue
from thinningpy.urn import UrnSpec, exact_pmf


def test_two_particles(rng):
    traj = simulate([0.25, 0.75], rng)
    np.testing.assert_array_equal(traj.hit_times, [0.25])
    assert traj.removed_pairs == [(0, 1)]


def test_four_particles_branches(uniform, rng):
    positions = quantile_init(4, uniform)
    seen = set()
    for _ in range(200):
        traj = simulate(positions, rng)
        assert traj.hit_times[0] == 0.125
        first_companion = int(traj.companion_index[0])
        expected = 0.625 if first_companion == 1 else 0.375
        assert traj.hit_times[1] == expected
        seen.add(first_companion)
    assert seen == {1, 2, 3}


def test_conservation(uniform, rng):
    traj = simulate(quantile_init(1000, uniform), rng)
    assert traj.hit_times.size == 500
    assert np.all(np.diff(traj.hit_times) > 0)
    removed = np.concatenate([traj.hit_index, traj.companion_index])
    assert sorted(removed.tolist()) == list(range(1000))
    # the hitter is at the origin exactly when it is removed
    np.testing.assert_array_equal(traj.positions[traj.hit_index], traj.hit_times)
    assert loss_path(traj).terminal == 0.5


@pytest.mark.parametrize(
    "positions, code",
    [
        ([0.5], "TOO_FEW_PARTICLES"),
        ([0.1, 0.2, 0.3], "ODD_PARTICLE_COUNT"),
        ([0.0, 0.5], "NON_POSITIVE_POSITION"),
        ([0.5, 0.5], "TIED_POSITIONS"),
        ([0.5, 0.25], "UNSORTED_POSITIONS"),
    ],
)
def test_rejects_invalid_states(positions, code, rng):
    with pytest.raises(InvalidStateError) as error:
        simulate(positions, rng)
    assert error.value.code == code


def test_deterministic_given_stream(uniform):
    positions = quantile_init(100, uniform)
    first = simulate(positions, np.random.default_rng(7))
    second = simulate(positions, np.random.default_rng(7))
    assert first.removed_pairs == second.removed_pairs


def test_loss_path_values():
    path = LossPath(np.array([0.25]), 2)
    assert path(0.2) == 0.0
    assert path(0.25) == 0.5
    assert path.left_limit(0.25) == 0.0
    path = LossPath(np.array([0.1, 0.3]), 4)
    assert path(0.2) == 0.25
    assert path.terminal == 0.5


def test_sup_deviation_two_particles(uniform, rng):
    path = loss_path(simulate(quantile_init(2, uniform), rng))
    assert sup_loss_deviation(path, KineticSolution(uniform)) == pytest.approx(0.28125)


def test_sup_deviation_bounds_dense_grid(exponential, rng):
    solution = KineticSolution(exponential)
    path = loss_path(simulate(quantile_init(50, exponential), rng))
    exact = sup_loss_deviation(path, solution)
    grid = np.linspace(0.0, 8.0, 200_001)
    sampled = np.max(np.abs(path(grid) - solution.loss(grid)))
    assert sampled <= exact + 1e-12
    assert sampled >= exact - 1e-3


def test_snapshot_examples(uniform, rng):
    positions = quantile_init(4, uniform)
    traj = simulate(positions, rng)
    initial = snapshot_empirical(traj, 0.0)
    np.testing.assert_allclose(initial.atoms, positions)
    np.testing.assert_allclose(initial.weights, 0.25)
    assert len(snapshot_empirical(traj, traj.hit_times[-1] + 1e-9)) == 0
    middle = snapshot_empirical(traj, 0.2)
    assert len(middle) == 2
    assert middle.mass == pytest.approx(0.5)


def test_mass_bookkeeping(exponential, rng):
    traj = simulate(quantile_init(200, exponential), rng)
    path = loss_path(traj)
    for t in np.linspace(0.0, 6.0, 61):
        assert snapshot_empirical(traj, t).mass + 2.0 * path(t) == pytest.approx(1.0)


def test_loss_increment_regularity(uniform, exponential):
    for density in (uniform, exponential):
        positions = quantile_init(60, density)
        for replica in range(50):
            traj = simulate(positions, np.random.default_rng(replica))
            path = loss_path(traj)
            for t0, t in [(0.0, 0.1), (0.1, 0.4), (0.3, 0.35), (0.2, 0.9)]:
                moved = shift_pushforward(snapshot_empirical(traj, t0), t - t0)
                distance = bl_distance(snapshot_empirical(traj, t), moved)
                assert distance <= 2.0 * (path(t) - path(t0)) + 1e-12


def test_trajectory_csv(tmp_path, uniform, rng):
    positions = quantile_init(10, uniform)
    traj = simulate(positions, rng)
    target = tmp_path / "traj.csv"
    traj.to_csv(target)
    header = target.read_text().splitlines()[0]
    assert header == "event_index,tau,hit_index,companion_index"
    loaded = Trajectory.read_csv(target, positions)
    assert loaded.removed_pairs == traj.removed_pairs
    np.testing.assert_array_equal(loaded.hit_times, traj.hit_times)
    with pytest.raises(InvalidStateError):
        Trajectory.read_csv(target, quantile_init(12, uniform))


def test_first_event_leaves_uniform_pair(uniform, rng):
    positions = quantile_init(4, uniform)
    counts = Counter()
    for _ in range(30_000):
        traj = simulate(positions, rng)
        counts[tuple(sorted({1, 2, 3} - {int(traj.companion_index[0])}))] += 1
    observed = [counts[pair] for pair in [(1, 2), (1, 3), (2, 3)]]
    assert chi_square_pvalue(observed, [1 / 3, 1 / 3, 1 / 3]) > 0.001


def test_survivors_are_a_uniform_thinning(uniform, rng):
    n = 6
    positions = quantile_init(n, uniform)
    t = positions[2] + 0.01
    counts = Counter()
    for _ in range(30_000):
        traj = simulate(positions, rng)
        survivors = tuple(np.flatnonzero(traj.removal_times > t).tolist())
        counts[survivors] += 1
    pairs = [(3, 4), (3, 5), (4, 5)]
    assert set(counts) <= set(pairs) | {()}
    observed = [counts[pair] for pair in pairs]
    assert chi_square_pvalue(observed, [1 / 3, 1 / 3, 1 / 3]) > 0.001


@pytest.mark.slow
def test_loss_has_urn_draw_law(uniform):
    n = 6
    positions = quantile_init(n, uniform)
    t = positions[2] + 0.01
    reds = n - int(np.count_nonzero(positions <= t))
    draws = exact_pmf(UrnSpec(n, reds)).draws()
    rng = np.random.default_rng(6)
    counts = Counter()
    for _ in range(100_000):
        counts[int(round(n * loss_path(simulate(positions, rng))(t)))] += 1
    assert set(counts) <= set(draws.support.tolist())
    observed = [counts[d] for d in draws.support.tolist()]
    assert chi_square_pvalue(observed, draws.probabilities) > 0.001


def test_empirical_measure_weights():
    measure = empirical_measure([0.5, 1.5], n=4)
    assert measure.mass == 0.5
    assert len(empirical_measure([], n=0)) == 0
