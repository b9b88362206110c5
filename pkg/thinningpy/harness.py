#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Replica orchestration and bound comparison for the concentration experiments.
"""
import asyncio
from collections import defaultdict
from concurrent.futures import Executor, ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, field
import functools
import json
import logging
import math
import time
from typing import Dict, Iterable, List, Optional, Sequence, Text, Tuple

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from thinningpy.const import (
    CSV_COLUMNS,
    DEFAULT_C,
    DEFAULT_COVERING,
    DEFAULT_DISC_M,
    DEFAULT_GRID,
    DEFAULT_REPLICAS,
    DEFAULT_SEED,
    EXACT_PMF_CAP,
    EXACT_SUBSETS_CAP,
)
from thinningpy.exceptions import ConfigError, ThinningException
from thinningpy.initial_data import InitialDensity, parse_density, quantile_init
from thinningpy.kinetic import KineticSolution
from thinningpy.metrics import bl_distance, discretize, shift_pushforward
from thinningpy.output import open_output
from thinningpy.particle_system import (
    empirical_measure,
    loss_path,
    simulate,
    snapshot_empirical,
    sup_loss_deviation,
)
from thinningpy.stats import TailEstimate, log_slope
from thinningpy.streams import stream
from thinningpy.thinning import (
    TestFunction,
    ThinningSpec,
    cosine,
    deviation_tail,
    deviation_tail_exact,
    distance_bound,
    distance_tail,
    indicator,
    maurey_bound,
    tent,
)
from thinningpy.urn import UrnSpec, exact_pmf, psi

_LOGGER = logging.getLogger(__name__)

KINDS = ("loss", "urn_clt", "thinning", "one_point", "uniform_emp")
PARTICLE_KINDS = ("loss", "one_point", "uniform_emp")


@dataclass
class ExperimentConfig:
    """Parameters of one experiment sweep.

    ``ns`` is the sweep of particle counts (ball counts for the urn, point counts for
    thinning). ``fractions`` holds red fractions for the urn and retained fractions
    for thinning.
    """

    kind: Text
    ns: Sequence[int] = (1000,)
    density: Text = "uniform"
    eps: Sequence[float] = (0.05, 0.1, 0.2)
    times: Sequence[float] = (0.25, 0.5, 0.75)
    fractions: Sequence[float] = (0.25, 0.5, 0.75)
    horizon: float = 0.9
    grid: int = DEFAULT_GRID
    replicas: int = DEFAULT_REPLICAS
    seed: int = DEFAULT_SEED
    disc_m: int = DEFAULT_DISC_M
    c_const: float = DEFAULT_C
    covering: int = DEFAULT_COVERING
    exact_cap: int = EXACT_PMF_CAP
    subsets_cap: int = EXACT_SUBSETS_CAP
    workers: int = 1
    jump_times: bool = False
    timing: bool = False

    def __post_init__(self):
        """Normalize sequences and validate the configuration."""
        self.ns = tuple(int(n) for n in self.ns)
        self.eps = tuple(float(e) for e in self.eps)
        self.times = tuple(float(t) for t in self.times)
        self.fractions = tuple(float(f) for f in self.fractions)
        if self.kind not in KINDS:
            raise ConfigError("UNKNOWN_EXPERIMENT", self.kind)
        if not self.ns or any(n < 1 for n in self.ns):
            raise ConfigError("BAD_SWEEP", f"ns={self.ns}")
        if self.kind in PARTICLE_KINDS and any(n % 2 or n < 2 for n in self.ns):
            raise ConfigError("ODD_PARTICLE_COUNT", f"ns={self.ns}")
        if self.kind == "urn_clt" and max(self.ns) > self.exact_cap:
            raise ConfigError("PMF_CAP", f"n={max(self.ns)} > {self.exact_cap}")
        if self.replicas < 1:
            raise ConfigError("BAD_REPLICAS", f"replicas={self.replicas}")
        if not self.eps or any(e <= 0 for e in self.eps):
            raise ConfigError("BAD_EPS", f"eps={self.eps}")
        if any(t < 0 for t in self.times):
            raise ConfigError("NEGATIVE_TIME", f"times={self.times}")
        if any(not 0 <= f <= 1 for f in self.fractions):
            raise ConfigError("BAD_FRACTION", f"fractions={self.fractions}")
        if self.c_const <= 0 or self.covering < 1:
            raise ConfigError("BAD_CONSTANT", f"C={self.c_const}, M={self.covering}")
        if self.horizon <= 0 or self.grid < 1 or self.disc_m < 1 or self.workers < 1:
            raise ConfigError("BAD_GRID", "horizon, grid, disc_m and workers must be positive")
        try:
            parse_density(self.density)
        except ThinningException as exception_:
            raise ConfigError("BAD_DENSITY", exception_.message) from exception_


@dataclass
class ResultRow:
    """One line of the result file."""

    experiment: Text
    n: int
    r: Optional[int] = None
    s: Optional[int] = None
    t: Optional[float] = None
    eps: Optional[float] = None
    replicas: int = 0
    tail_hat: Optional[float] = None
    wilson_hi: Optional[float] = None
    bound: Optional[float] = None
    bound_ok: bool = True
    disc_err: float = 0.0
    seed: int = 0
    runtime_ms: int = 0
    check: Text = ""
    stat: Optional[float] = None
    stat_hi: Optional[float] = None
    below_n_eps: bool = False

    def sort_key(self) -> Tuple:
        """Return a total order key independent of completion order."""

        def number(value):
            return -1.0 if value is None else float(value)

        return (
            self.experiment,
            self.check,
            self.n,
            number(self.r),
            number(self.s),
            number(self.t),
            number(self.eps),
        )


@dataclass(frozen=True)
class BoundSpec:
    """Constants of the concentration bounds and where each value comes from."""

    c_const: float = DEFAULT_C
    covering: int = DEFAULT_COVERING
    k_const: Optional[float] = None
    kappa: Optional[float] = None
    provenance: Dict[Text, Text] = field(
        default_factory=lambda: {
            "loss": "closed-form",
            "pointwise": "closed-form",
            "urn": "closed-form",
            "thinning": "closed-form",
            "c_const": "unspecified",
            "covering": "configured",
            "k_const": "unspecified",
            "kappa": "unspecified",
        }
    )

    def loss(self, n: int, eps: float) -> float:
        """Return (2/eps) exp(-8 n eps^2), bounding P(sup |L^n - L| > eps/2)."""
        return 2.0 / eps * math.exp(-8.0 * n * eps * eps)

    def pointwise(self, n: int, eps: float) -> float:
        """Return 2 exp(-8 n eps^2), bounding P(|L^n(t) - L(t)| > eps)."""
        return 2.0 * math.exp(-8.0 * n * eps * eps)

    def pointwise_sharp(self, n: int, eps: float, rho: float) -> float:
        """Return 2 exp(-n eps^2 / psi(rho))."""
        return _exp_bound(n * eps * eps, float(psi(rho)))

    def urn_terminal(self, n: int, eps: float, rho: float) -> float:
        """Return 2 exp(-n eps^2 / (4 psi(rho))), bounding P(|X/n - phi| > eps)."""
        return _exp_bound(n * eps * eps, 4.0 * float(psi(rho)))

    def urn_draws(self, n: int, eps: float, rho: float) -> float:
        """Return 2 exp(-n eps^2 / psi(rho)), bounding P(|d/n - (1 - phi)/2| > eps)."""
        return _exp_bound(n * eps * eps, float(psi(rho)))

    def one_point(self, n: int, eps: float) -> float:
        """Return 2 (M + 1) exp(-n eps^2 / 256)."""
        return 2.0 * (self.covering + 1) * math.exp(-n * eps * eps / 256.0)

    def uniform(self, n: int, eps: float, grid: int) -> Optional[float]:
        """Return K (M N + 1/eps) exp(-kappa n eps^2) when K and kappa are configured."""
        if self.k_const is None or self.kappa is None:
            return None
        return (
            self.k_const
            * (self.covering * grid + 1.0 / eps)
            * math.exp(-self.kappa * n * eps * eps)
        )


def _exp_bound(exponent: float, scale: float) -> float:
    if scale <= 0:
        return 0.0
    return 2.0 * math.exp(-exponent / scale)


def n_epsilon(eps: float, c_const: float = DEFAULT_C) -> float:
    """Return the larger root of n eps = 4 C log n, or 1 when every n >= 1 qualifies."""
    if eps <= 0:
        raise ConfigError("BAD_EPS", f"eps={eps}")

    def gap(n: float) -> float:
        return n * eps - 4.0 * c_const * math.log(n)

    turning = max(1.0, 4.0 * c_const / eps)
    if gap(turning) >= 0:
        return 1.0
    upper = 2.0 * turning
    while gap(upper) <= 0:
        upper *= 2.0
    return float(brentq(gap, turning, upper))


def bound_ok(upper: Optional[float], bound: Optional[float]) -> bool:
    """Return whether a one-sided upper estimate respects a bound; vacuous bounds pass."""
    if bound is None or upper is None or bound >= 1.0:
        return True
    return upper <= bound


def all_bounds_ok(rows: Iterable[ResultRow]) -> bool:
    """Return whether every row at or above its n_eps respects its bound."""
    return all(row.bound_ok for row in rows if not row.below_n_eps)


def _chunks(total: int, pieces: int) -> List[range]:
    size = max(1, math.ceil(total / max(1, pieces)))
    return [range(start, min(total, start + size)) for start in range(0, total, size)]


@functools.lru_cache(maxsize=None)
def _density(spec: Text) -> InitialDensity:
    return parse_density(spec)


@functools.lru_cache(maxsize=32)
def _positions(spec: Text, n: int) -> np.ndarray:
    return quantile_init(n, _density(spec))


@functools.lru_cache(maxsize=256)
def _limit(spec: Text, t: float, m: int):
    return discretize(KineticSolution(_density(spec)), t, m)


@functools.lru_cache(maxsize=1024)
def _shifted_target(spec: Text, n: int, t: float):
    """Return rho(t) S_t* mu_n(0), the deterministic transport of the initial sample."""
    initial = empirical_measure(_positions(spec, n))
    rho = float(KineticSolution(_density(spec)).rho(t))
    return shift_pushforward(initial, t).scaled(rho)


@functools.lru_cache(maxsize=1024)
def _shifted_gap(spec: Text, n: int, t: float, m: int) -> float:
    """Return d_BL(rho(t) S_t* mu_n(0), limit at t) plus the discretization error."""
    measure, error = _limit(spec, t, m)
    return bl_distance(_shifted_target(spec, n, t), measure) + error


def _loss_chunk(
    seed: int, spec: Text, n: int, point: int, replicas: range, times: Tuple[float, ...]
) -> Tuple[np.ndarray, np.ndarray]:
    """Return sup deviations and pointwise deviations at ``times`` for some replicas."""
    solution = KineticSolution(_density(spec))
    positions = _positions(spec, n)
    grid = np.asarray(times, dtype=float)
    limit = np.asarray(solution.loss(grid))
    sups = np.empty(len(replicas))
    pointwise = np.empty((len(replicas), grid.size))
    for row, replica in enumerate(replicas):
        path = loss_path(simulate(positions, stream(seed, "loss", point, replica)))
        sups[row] = sup_loss_deviation(path, solution)
        pointwise[row] = np.abs(path(grid) - limit)
    return sups, pointwise


def _loss_exact_task(
    spec: Text, n: int, t: float, eps: Tuple[float, ...], cap: int
) -> Tuple[int, float, List[float]]:
    """Return r(t), rho(t) and the exact P(|L^n(t) - L(t)| > eps) per eps.

    n L^n(t) has the law of the draw count d_{n, r(t)} with r(t) the number of
    particles not yet at the origin.
    """
    solution = KineticSolution(_density(spec))
    positions = _positions(spec, n)
    reds = n - int(np.count_nonzero(positions <= t))
    draws = exact_pmf(UrnSpec(n, reds), cap=cap).draws()
    deviation = np.abs(draws.support / n - float(solution.loss(t)))
    tails = [float(draws.probabilities[deviation > e].sum()) for e in eps]
    return reds, float(solution.rho(t)), tails


def _urn_task(n: int, r: int, eps: Tuple[float, ...], cap: int):
    distribution = exact_pmf(UrnSpec(n, r), cap=cap)
    ks = distribution.ks_normal() if 0 < r < n else None
    tails = [
        (distribution.tail_probability(e), distribution.draws_tail_probability(e)) for e in eps
    ]
    return ks, tails


def _test_functions(density: InitialDensity) -> List[TestFunction]:
    median = float(density.quantile(0.5))
    spread = max(float(density.quantile(0.75)) - float(density.quantile(0.25)), 1e-12)
    return [
        indicator(0.0, median),
        tent(median, spread),
        cosine(math.pi / spread),
    ]


def _thinning_task(
    seed: int,
    spec: Text,
    r: int,
    s: int,
    point: int,
    eps: Tuple[float, ...],
    replicas: int,
    cap: int,
):
    """Return per test function the tails at every eps, then the BL distance tails."""
    density = _density(spec)
    levels = (2.0 * np.arange(1, r + 1) - 1.0) / (2.0 * r)
    thinning = ThinningSpec(np.asarray(density.quantile(levels)), s)
    exact = math.comb(r, s) <= cap
    results = []
    for index, f in enumerate(_test_functions(density)):
        if exact:
            tails = [deviation_tail_exact(thinning, f, e, cap=cap) for e in eps]
        else:
            rng = stream(seed, "thinning", point, index)
            tails = [deviation_tail(thinning, f, e, replicas, rng) for e in eps]
        results.append((f.name, f.sup_norm, tails))
    distance = [
        distance_tail(thinning, e, replicas, stream(seed, "thinning", point, 1000 + k))
        for k, e in enumerate(eps)
    ]
    return results, distance


def _one_point_chunk(
    seed: int, spec: Text, n: int, point: int, replicas: range, times: Tuple[float, ...]
) -> np.ndarray:
    """Return d_BL(mu_n(t), rho(t) S_t* mu_n(0)) per replica and time."""
    positions = _positions(spec, n)
    targets = [_shifted_target(spec, n, t) for t in times]
    out = np.empty((len(replicas), len(times)))
    for row, replica in enumerate(replicas):
        traj = simulate(positions, stream(seed, "one_point", point, replica))
        for column, (t, target) in enumerate(zip(times, targets)):
            out[row, column] = bl_distance(snapshot_empirical(traj, t), target)
    return out


def _uniform_chunk(
    seed: int,
    spec: Text,
    n: int,
    point: int,
    replicas: range,
    horizon: float,
    grid: int,
    disc_m: int,
    jump_times: bool,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Return the grid sup of d_BL to the limit, its interpolated upper bound and error.

    The grid sup includes the discretization error of the limit side, so it is a
    certified upper estimate of the sup over the grid and a lower estimate of the sup
    over [0, horizon]. The upper column bounds the sup over the whole interval: at
    each grid time the distance to the transported initial sample plus that sample's
    distance to the limit, then the interpolation slack between grid times.
    """
    density = _density(spec)
    solution = KineticSolution(density)
    positions = _positions(spec, n)
    uniform_times = np.linspace(0.0, horizon, grid + 1).tolist()
    step = horizon / grid
    slack = 4.0 * (density.modulus_bounds(step)[1] + step + 1.0 / n)
    # replica independent, shared by every replica of the chunk
    limits = [_limit(spec, t, disc_m) for t in uniform_times]
    targets = [_shifted_target(spec, n, t) for t in uniform_times]
    gaps = [_shifted_gap(spec, n, t, disc_m) for t in uniform_times]
    sups = np.empty(len(replicas))
    uppers = np.empty(len(replicas))
    worst_error = max(error for _, error in limits)
    for row, replica in enumerate(replicas):
        traj = simulate(positions, stream(seed, "uniform_emp", point, replica))
        value = 0.0
        local = 0.0
        for t, (limit, error), target, gap in zip(uniform_times, limits, targets, gaps):
            snapshot = snapshot_empirical(traj, t)
            value = max(value, bl_distance(snapshot, limit) + error)
            local = max(local, bl_distance(snapshot, target) + gap)
        if jump_times:
            for t in traj.hit_times[traj.hit_times <= horizon].tolist():
                limit, error = _limit(spec, t, disc_m)
                worst_error = max(worst_error, error)
                value = max(value, bl_distance(snapshot_empirical(traj, t), limit) + error)
        deviation = sup_loss_deviation(loss_path(traj), solution)
        sups[row] = value
        uppers[row] = local + 4.0 * deviation + slack
    return sups, uppers, worst_error


class Harness:
    """Runs the replicas of one experiment and compares tails with their bounds.

    Replica chunks are submitted to an executor and awaited together; their results
    are merged in submission order, so the output does not depend on scheduling.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        bounds: Optional[BoundSpec] = None,
        executor: Optional[Executor] = None,
    ) -> None:
        """Initialize the harness.

        Args:
            config (ExperimentConfig): Experiment to run.
            bounds (BoundSpec, optional): Bound constants. Defaults to the config's C
                and covering number.
            executor (Executor, optional): Executor for replica chunks. Defaults to
                the event loop's default executor.

        """
        self.config = config
        self.bounds = bounds or BoundSpec(c_const=config.c_const, covering=config.covering)
        self._executor = executor

    async def _map(self, func, calls: Sequence[Tuple]) -> List:
        loop = asyncio.get_running_loop()
        tasks = [
            loop.run_in_executor(self._executor, functools.partial(func, *args))
            for args in calls
        ]
        return await asyncio.gather(*tasks)

    def _pieces(self) -> int:
        return 4 * self.config.workers

    def _row(self, **kwargs) -> ResultRow:
        cfg = self.config
        kwargs.setdefault("seed", cfg.seed)
        eps = kwargs.get("eps")
        if eps is not None:
            kwargs.setdefault(
                "below_n_eps", kwargs["n"] < n_epsilon(eps, self.bounds.c_const)
            )
        return ResultRow(**kwargs)

    def _tail_row(
        self,
        estimate: TailEstimate,
        bound: Optional[float],
        runtime_ms: int = 0,
        **kwargs,
    ) -> ResultRow:
        upper = estimate.upper
        row = self._row(
            replicas=estimate.trials,
            tail_hat=estimate.probability,
            wilson_hi=upper,
            bound=bound,
            bound_ok=bound_ok(upper, bound),
            runtime_ms=runtime_ms,
            **kwargs,
        )
        if not row.bound_ok:
            if estimate.is_exact or estimate.lower > bound:
                _LOGGER.warning("Bound violated: %s", row)
            else:
                _LOGGER.warning("Bound comparison inconclusive: %s", row)
        return row

    def _monotone_rows(
        self, series: Dict[Tuple, List[Tuple[TailEstimate, Dict]]]
    ) -> List[ResultRow]:
        """Check that each sampled tail does not grow between consecutive n.

        ``series`` maps a (check, t, eps, ...) key to the estimates of that tail along
        the sweep, each with the row fields it was reported under. The Wilson lower
        end at the larger n must not exceed the Wilson upper end at the smaller n;
        ``stat`` holds their difference. Exact estimates are skipped.
        """
        rows = []
        for points in series.values():
            sampled = sorted(
                (point for point in points if not point[0].is_exact),
                key=lambda point: point[1]["n"],
            )
            for (before, _), (after, fields) in zip(sampled, sampled[1:]):
                excess = after.lower - before.upper
                row = self._row(
                    **{**fields, "check": f"monotone:{fields['check']}"},
                    replicas=after.trials,
                    tail_hat=after.probability,
                    wilson_hi=after.upper,
                    bound=before.upper,
                    bound_ok=excess <= 0.0,
                    stat=excess,
                    below_n_eps=False,
                )
                if not row.bound_ok:
                    _LOGGER.warning("Tail grew with n: %s", row)
                rows.append(row)
        return rows

    def _elapsed(self, start: float) -> int:
        if not self.config.timing:
            return 0
        return int(round((time.perf_counter() - start) * 1000.0))

    async def run(self) -> List[ResultRow]:
        """Run the configured experiment and return its rows in canonical order."""
        runner = {
            "loss": self.run_loss_concentration,
            "urn_clt": self.run_urn_clt,
            "thinning": self.run_thinning,
            "one_point": self.run_one_point,
            "uniform_emp": self.run_uniform_emp,
        }[self.config.kind]
        rows = await runner()
        return sorted(rows, key=ResultRow.sort_key)

    async def run_loss_concentration(self) -> List[ResultRow]:
        """Compare sup and pointwise loss deviations with their bounds.

        Monte Carlo rows test P(sup |L^n - L| > eps/2) and P(|L^n(t) - L(t)| > eps);
        exact rows compute the pointwise law from the urn.
        """
        cfg = self.config
        rows = []
        series: Dict[Tuple, List] = defaultdict(list)
        for point, n in enumerate(cfg.ns):
            start = time.perf_counter()
            chunks = _chunks(cfg.replicas, self._pieces())
            results = await self._map(
                _loss_chunk,
                [(cfg.seed, cfg.density, n, point, chunk, cfg.times) for chunk in chunks],
            )
            sups = np.concatenate([sups for sups, _ in results])
            pointwise = np.concatenate([values for _, values in results])
            exact = []
            if n <= cfg.exact_cap:
                exact = await self._map(
                    _loss_exact_task,
                    [(cfg.density, n, t, cfg.eps, cfg.exact_cap) for t in cfg.times],
                )
            runtime = self._elapsed(start)
            _LOGGER.debug("Loss sweep n=%s: median sup deviation %s", n, np.median(sups))
            for eps in cfg.eps:
                estimate = TailEstimate.from_counts(np.count_nonzero(sups > eps / 2), sups.size)
                fields = dict(experiment="loss", n=n, eps=eps, check="sup")
                series[("sup", eps)].append((estimate, fields))
                rows.append(
                    self._tail_row(
                        estimate,
                        self.bounds.loss(n, eps),
                        runtime_ms=runtime,
                        stat=float(np.median(sups)),
                        **fields,
                    )
                )
                for column, t in enumerate(cfg.times):
                    hits = np.count_nonzero(pointwise[:, column] > eps)
                    estimate = TailEstimate.from_counts(hits, sups.size)
                    fields = dict(experiment="loss", n=n, t=t, eps=eps, check="pointwise")
                    series[("pointwise", t, eps)].append((estimate, fields))
                    rows.append(
                        self._tail_row(
                            estimate,
                            self.bounds.pointwise(n, eps),
                            runtime_ms=runtime,
                            **fields,
                        )
                    )
            for t, (reds, rho, tails) in zip(cfg.times, exact):
                for eps, tail in zip(cfg.eps, tails):
                    estimate = TailEstimate.exact(tail)
                    common = dict(experiment="loss", n=n, r=reds, t=t, eps=eps)
                    rows.append(
                        self._tail_row(
                            estimate,
                            self.bounds.pointwise(n, eps),
                            runtime_ms=runtime,
                            check="pointwise_exact",
                            **common,
                        )
                    )
                    rows.append(
                        self._tail_row(
                            estimate,
                            self.bounds.pointwise_sharp(n, eps, rho),
                            runtime_ms=runtime,
                            check="pointwise_exact_psi",
                            **common,
                        )
                    )
        rows.extend(self._monotone_rows(series))
        return rows

    async def run_urn_clt(self) -> List[ResultRow]:
        """Report KS distances to the normal law and exact urn tails against bounds."""
        cfg = self.config
        start = time.perf_counter()
        calls = [
            (n, int(math.floor(fraction * n)))
            for n in cfg.ns
            for fraction in cfg.fractions
        ]
        results = await self._map(
            _urn_task, [(n, r, cfg.eps, cfg.exact_cap) for n, r in calls]
        )
        runtime = self._elapsed(start)
        rows = []
        for (n, r), (ks, tails) in zip(calls, results):
            rho = r / n
            if ks is not None:
                rows.append(
                    self._row(
                        experiment="urn_clt",
                        n=n,
                        r=r,
                        check="ks",
                        stat=ks,
                        runtime_ms=runtime,
                    )
                )
            for eps, (terminal, draws) in zip(cfg.eps, tails):
                rows.append(
                    self._tail_row(
                        TailEstimate.exact(terminal),
                        self.bounds.urn_terminal(n, eps, rho),
                        runtime_ms=runtime,
                        experiment="urn_clt",
                        n=n,
                        r=r,
                        eps=eps,
                        check="terminal",
                    )
                )
                rows.append(
                    self._tail_row(
                        TailEstimate.exact(draws),
                        self.bounds.urn_draws(n, eps, rho),
                        runtime_ms=runtime,
                        experiment="urn_clt",
                        n=n,
                        r=r,
                        eps=eps,
                        check="draws",
                    )
                )
        return rows

    async def run_thinning(self) -> List[ResultRow]:
        """Compare thinning deviation tails with the Maurey and distance bounds.

        These bounds hold for every r, so no row is exempted as below n_eps.
        """
        cfg = self.config
        start = time.perf_counter()
        calls = [
            (r, int(math.floor(fraction * r)), fraction)
            for r in cfg.ns
            for fraction in cfg.fractions
        ]
        results = await self._map(
            _thinning_task,
            [
                (cfg.seed, cfg.density, r, s, point, cfg.eps, cfg.replicas, cfg.subsets_cap)
                for point, (r, s, _) in enumerate(calls)
            ],
        )
        runtime = self._elapsed(start)
        rows = []
        series: Dict[Tuple, List] = defaultdict(list)
        for (r, s, fraction), (per_function, distance) in zip(calls, results):
            checks = [
                (f"maurey:{name}", sup_norm, tails) for name, sup_norm, tails in per_function
            ]
            checks.append(("distance", None, distance))
            for check, sup_norm, tails in checks:
                for eps, estimate in zip(cfg.eps, tails):
                    if sup_norm is None:
                        bound = distance_bound(r, eps, self.bounds.covering)
                    else:
                        bound = maurey_bound(r, eps, sup_norm)
                    fields = dict(
                        experiment="thinning", n=r, r=r, s=s, eps=eps, check=check
                    )
                    series[(check, fraction, eps)].append((estimate, fields))
                    rows.append(
                        self._tail_row(
                            estimate,
                            bound,
                            runtime_ms=runtime,
                            below_n_eps=False,
                            **fields,
                        )
                    )
        rows.extend(self._monotone_rows(series))
        return rows

    async def run_one_point(self) -> List[ResultRow]:
        """Compare P(d_BL(mu_n(t), rho(t) S_t* mu_n(0)) > eps) with the one-point bound."""
        cfg = self.config
        rows = []
        series: Dict[Tuple, List] = defaultdict(list)
        for point, n in enumerate(cfg.ns):
            start = time.perf_counter()
            chunks = _chunks(cfg.replicas, self._pieces())
            results = await self._map(
                _one_point_chunk,
                [(cfg.seed, cfg.density, n, point, chunk, cfg.times) for chunk in chunks],
            )
            distances = np.concatenate(results)
            runtime = self._elapsed(start)
            for column, t in enumerate(cfg.times):
                values = distances[:, column]
                for eps in cfg.eps:
                    estimate = TailEstimate.from_counts(np.count_nonzero(values > eps), values.size)
                    fields = dict(experiment="one_point", n=n, t=t, eps=eps, check="one_point")
                    series[(t, eps)].append((estimate, fields))
                    rows.append(
                        self._tail_row(
                            estimate,
                            self.bounds.one_point(n, eps),
                            runtime_ms=runtime,
                            stat=float(np.median(values)),
                            **fields,
                        )
                    )
        rows.extend(self._monotone_rows(series))
        return rows

    async def run_uniform_emp(self) -> List[ResultRow]:
        """Estimate sup_t d_BL(mu_n(t), rho(t) S_t* F0) over [0, T] along the n sweep.

        The constants of the uniform bound are unspecified, so rows carry the tail
        estimates and the sweep rows check the decay shape: the fitted slope of
        log P(sup > eps) against n and of log median against log n must be negative.
        """
        cfg = self.config
        rows = []
        medians = []
        series: Dict[Tuple, List] = defaultdict(list)
        tails: Dict[float, List[float]] = {eps: [] for eps in cfg.eps}
        for point, n in enumerate(cfg.ns):
            start = time.perf_counter()
            chunks = _chunks(cfg.replicas, self._pieces())
            results = await self._map(
                _uniform_chunk,
                [
                    (
                        cfg.seed,
                        cfg.density,
                        n,
                        point,
                        chunk,
                        cfg.horizon,
                        cfg.grid,
                        cfg.disc_m,
                        cfg.jump_times,
                    )
                    for chunk in chunks
                ],
            )
            sups = np.concatenate([sups for sups, _, _ in results])
            uppers = np.concatenate([uppers for _, uppers, _ in results])
            error = max(error for _, _, error in results)
            runtime = self._elapsed(start)
            median = float(np.median(sups))
            medians.append(median)
            _LOGGER.debug("Uniform sweep n=%s: median grid sup %s", n, median)
            for eps in cfg.eps:
                estimate = TailEstimate.from_counts(np.count_nonzero(sups > eps), sups.size)
                tails[eps].append(estimate.probability)
                fields = dict(
                    experiment="uniform_emp", n=n, t=cfg.horizon, eps=eps, check="grid_sup"
                )
                series[(eps,)].append((estimate, fields))
                rows.append(
                    self._tail_row(
                        estimate,
                        self.bounds.uniform(n, eps, cfg.grid),
                        runtime_ms=runtime,
                        disc_err=error,
                        stat=median,
                        stat_hi=float(np.median(uppers)),
                        **fields,
                    )
                )
        for eps in cfg.eps:
            slope = _exponential_rate(cfg.ns, tails[eps])
            rows.append(
                self._row(
                    experiment="uniform_emp",
                    n=0,
                    eps=eps,
                    replicas=cfg.replicas,
                    check="decay",
                    stat=slope,
                    bound_ok=math.isnan(slope) or slope < 0,
                    below_n_eps=False,
                )
            )
        slope = log_slope(cfg.ns, medians)
        rows.append(
            self._row(
                experiment="uniform_emp",
                n=0,
                replicas=cfg.replicas,
                check="median_decay",
                stat=slope,
                bound_ok=math.isnan(slope) or slope < 0,
            )
        )
        rows.extend(self._monotone_rows(series))
        return rows


def _exponential_rate(ns: Sequence[int], probabilities: Sequence[float]) -> float:
    """Return the slope of log P against n over the positive estimates."""
    xs = np.asarray(ns, dtype=float)
    ys = np.asarray(probabilities, dtype=float)
    keep = ys > 0
    if keep.sum() < 2:
        return math.nan
    return float(stats.linregress(xs[keep], np.log(ys[keep])).slope)


def run_experiment(
    config: ExperimentConfig, bounds: Optional[BoundSpec] = None
) -> List[ResultRow]:
    """Run an experiment to completion, in worker processes when ``workers > 1``."""
    _LOGGER.debug("Running %s with seed %s", config.kind, config.seed)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            return asyncio.run(Harness(config, bounds, executor).run())
    return asyncio.run(Harness(config, bounds).run())


def _cell(value) -> Text:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def emit(rows: Iterable[ResultRow], path, format: Text = "csv") -> None:
    """Write rows sorted canonically as CSV or JSON lines.

    Raises
        ConfigError: unknown format.

    """
    # pylint: disable=redefined-builtin
    if format not in ("csv", "json"):
        raise ConfigError("UNKNOWN_FORMAT", format)
    ordered = sorted(rows, key=ResultRow.sort_key)
    with open_output(path) as handle:
        if format == "csv":
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in ordered:
                record = asdict(row)
                writer.writerow([_cell(record[column]) for column in CSV_COLUMNS])
        else:
            for row in ordered:
                record = asdict(row)
                handle.write(
                    json.dumps({column: _jsonable(record[column]) for column in CSV_COLUMNS})
                )
                handle.write("\n")
    _LOGGER.debug("Wrote %s rows to %s", len(ordered), path)

