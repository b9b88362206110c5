#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Event-driven simulation of the n-particle system. Particles drift to the origin at
unit speed; whenever one reaches it, that particle and a uniformly chosen companion
among the other survivors are removed.
"""
import csv
from dataclasses import dataclass
import logging
from typing import List, Optional, Tuple

import numpy as np

from thinningpy.alive_set import AliveSet
from thinningpy.exceptions import InvalidStateError
from thinningpy.kinetic import KineticSolution
from thinningpy.metrics import DiscreteMeasure
from thinningpy.output import open_output

_LOGGER = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("event_index", "tau", "hit_index", "companion_index")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Event log of one run.

    Attributes:
        positions (np.ndarray): Initial positions a_1 < ... < a_n.
        hit_times (np.ndarray): Strictly increasing hitting times tau_1 < ... < tau_{n/2}.
        hit_index (np.ndarray): Index of the particle reaching the origin at each event.
        companion_index (np.ndarray): Index of the companion removed with it.

    """

    positions: np.ndarray
    hit_times: np.ndarray
    hit_index: np.ndarray
    companion_index: np.ndarray

    @property
    def n(self) -> int:
        """Return the initial particle count."""
        return int(self.positions.size)

    @property
    def removed_pairs(self) -> List[Tuple[int, int]]:
        """Return the (hitter, companion) index pairs in event order."""
        return list(zip(self.hit_index.tolist(), self.companion_index.tolist()))

    @property
    def removal_times(self) -> np.ndarray:
        """Return the removal time of every particle index."""
        times = np.empty(self.n)
        times[self.hit_index] = self.hit_times
        times[self.companion_index] = self.hit_times
        return times

    def to_csv(self, path) -> None:
        """Write the event log with columns event_index, tau, hit_index, companion_index."""
        events = zip(
            self.hit_times.tolist(), self.hit_index.tolist(), self.companion_index.tolist()
        )
        with open_output(path) as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRAJECTORY_COLUMNS)
            for event, (tau, hitter, companion) in enumerate(events, start=1):
                writer.writerow((event, repr(tau), hitter, companion))

    @classmethod
    def read_csv(cls, path, positions) -> "Trajectory":
        """Rebuild a trajectory from an event log and the initial positions.

        Raises
            InvalidStateError

        """
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        hit_times = np.array([float(row["tau"]) for row in rows])
        hit_index = np.array([int(row["hit_index"]) for row in rows], dtype=np.int64)
        companion = np.array(
            [int(row["companion_index"]) for row in rows], dtype=np.int64
        )
        positions = np.asarray(positions, dtype=float)
        if 2 * len(rows) != positions.size:
            raise InvalidStateError(
                "TRUNCATED_LOG", f"{len(rows)} events for n={positions.size}"
            )
        if not np.array_equal(positions[hit_index], hit_times):
            raise InvalidStateError("LOG_MISMATCH", "hit times differ from hitter positions")
        return cls(positions, hit_times, hit_index, companion)


@dataclass(frozen=True, eq=False)
class LossPath:
    """Right-continuous step function L^n(t) = #{i: tau_i <= t} / n."""

    hit_times: np.ndarray
    n: int

    def __call__(self, t):
        """Return L^n(t)."""
        count = np.searchsorted(self.hit_times, t, side="right")
        return count / self.n if np.ndim(t) else float(count) / self.n

    def left_limit(self, t):
        """Return L^n(t-)."""
        count = np.searchsorted(self.hit_times, t, side="left")
        return count / self.n if np.ndim(t) else float(count) / self.n

    @property
    def terminal(self) -> float:
        """Return L^n at infinity."""
        return self.hit_times.size / self.n


def validate_positions(positions) -> np.ndarray:
    """Return ``positions`` as an array after checking they form a valid state.

    Raises
        InvalidStateError: odd or too small count, ties, disorder or a position <= 0.

    """
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 1 or positions.size < 2:
        raise InvalidStateError("TOO_FEW_PARTICLES", f"n={positions.size}")
    if positions.size % 2:
        raise InvalidStateError("ODD_PARTICLE_COUNT", f"n={positions.size}")
    if not np.all(positions > 0) or not np.all(np.isfinite(positions)):
        raise InvalidStateError("NON_POSITIVE_POSITION", f"min={positions.min()}")
    gaps = np.diff(positions)
    if np.any(gaps == 0):
        raise InvalidStateError("TIED_POSITIONS", "positions must be distinct")
    if np.any(gaps < 0):
        raise InvalidStateError("UNSORTED_POSITIONS", "positions must be increasing")
    return positions


def simulate(positions, rng: np.random.Generator) -> Trajectory:
    """Run the particle system until every particle is removed.

    The drift is a global time offset: the next hitter is always the lowest alive
    index and its initial position is the hitting time.

    Args:
        positions: Strictly increasing positive initial positions, even count.
        rng (np.random.Generator): Random stream owned by this run.

    Raises
        InvalidStateError

    Returns
        Trajectory: the event log.

    """
    positions = validate_positions(positions)
    n = positions.size
    events = n // 2
    # companion rank among the m - 1 other survivors, m = n, n - 2, ..., 2
    ranks = rng.integers(0, np.arange(n - 1, 0, -2)).tolist()
    alive = AliveSet(n)
    hit_index = np.empty(events, dtype=np.int64)
    companion_index = np.empty(events, dtype=np.int64)
    for event in range(events):
        hitter = alive.first()
        alive.remove(hitter)
        companion = alive.select(ranks[event])
        alive.remove(companion)
        hit_index[event] = hitter
        companion_index[event] = companion
    _LOGGER.debug("Simulated %s particles, last hit at %s", n, positions[hit_index[-1]])
    return Trajectory(positions, positions[hit_index], hit_index, companion_index)


def loss_path(traj: Trajectory) -> LossPath:
    """Return the loss path L^n of a trajectory."""
    return LossPath(traj.hit_times, traj.n)


def sup_loss_deviation(path: LossPath, limit: KineticSolution) -> float:
    """Return sup over t >= 0 of |L^n(t) - L(t)|.

    L is continuous and nondecreasing while L^n is a step function, so the sup is
    attained at a hitting time, from the left or from the right.
    """
    if path.hit_times.size == 0:
        return 0.0
    limit_values = np.asarray(limit.loss(path.hit_times))
    after = np.arange(1, path.hit_times.size + 1) / path.n
    before = after - 1.0 / path.n
    deviation = np.maximum(np.abs(after - limit_values), np.abs(before - limit_values))
    return float(deviation.max())


def empirical_measure(positions, n: Optional[int] = None) -> DiscreteMeasure:
    """Return (1/n) sum of unit atoms at ``positions``; n defaults to their count."""
    positions = np.asarray(positions, dtype=float)
    n = positions.size if n is None else n
    if n == 0:
        return DiscreteMeasure.empty()
    return DiscreteMeasure.from_atoms(positions, np.full(positions.size, 1.0 / n))


def snapshot_empirical(traj: Trajectory, t: float) -> DiscreteMeasure:
    """Return mu_n(t): atoms a_i - t of the particles alive after time t, weight 1/n."""
    if t < 0:
        raise InvalidStateError("NEGATIVE_TIME", f"t={t}")
    alive = traj.removal_times > t
    return empirical_measure(traj.positions[alive] - t, traj.n)
