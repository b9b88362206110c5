#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Uniform thinning of a finite point set and its concentration around the mean.
"""
from dataclasses import dataclass
import functools
import logging
import math
from typing import Callable, Optional, Text, Tuple

import numpy as np

from thinningpy.const import EXACT_SUBSETS_CAP
from thinningpy.exceptions import CapExceededError, InvalidStateError
from thinningpy.metrics import DiscreteMeasure, bl_distance
from thinningpy.stats import TailEstimate

_LOGGER = logging.getLogger(__name__)

# largest replicas x points block sampled at once
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True, eq=False)
class ThinningSpec:
    """Keep s of the r points b_1 < ... < b_r, chosen uniformly."""

    points: np.ndarray
    s: int

    def __post_init__(self):
        """Validate the point set and the retained count."""
        points = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", points)
        if points.ndim != 1 or np.any(np.diff(points) <= 0):
            raise InvalidStateError("UNSORTED_POSITIONS", "points must be strictly increasing")
        if np.any(points < 0):
            raise InvalidStateError("NEGATIVE_ATOM", "points must be >= 0")
        if not 0 <= self.s <= points.size:
            raise InvalidStateError("BAD_RETAINED_COUNT", f"s={self.s}, r={points.size}")

    @property
    def r(self) -> int:
        """Return the number of points."""
        return int(self.points.size)

    @property
    def full(self) -> DiscreteMeasure:
        """Return nu = (1/r) sum_j delta_{b_j}."""
        if self.r == 0:
            return DiscreteMeasure.empty()
        return DiscreteMeasure(self.points, np.full(self.r, 1.0 / self.r))


@dataclass(frozen=True)
class TestFunction:
    """Test function with declared bounds on its sup norm and Lipschitz constant."""

    __test__ = False

    evaluator: Callable[[np.ndarray], np.ndarray]
    sup_norm: float
    lipschitz: Optional[float] = None
    name: Text = "phi"

    def __call__(self, x):
        """Evaluate the function."""
        return self.evaluator(np.asarray(x, dtype=float))

    @property
    def bl_norm(self) -> Optional[float]:
        """Return sup norm plus Lipschitz constant, when both are declared."""
        if self.lipschitz is None:
            return None
        return self.sup_norm + self.lipschitz


def constant(value: float) -> TestFunction:
    """Return phi = value."""
    return TestFunction(
        lambda x: np.full(np.shape(x), float(value)), abs(value), 0.0, f"const({value:g})"
    )


def identity(sup_norm: float) -> TestFunction:
    """Return phi(x) = x, with the sup norm of the support it is used on."""
    return TestFunction(lambda x: x, sup_norm, 1.0, "identity")


def indicator(lower: float, upper: float) -> TestFunction:
    """Return the bounded measurable indicator of (lower, upper]."""
    return TestFunction(
        lambda x: ((x > lower) & (x <= upper)).astype(float),
        1.0,
        None,
        f"indicator({lower:g},{upper:g})",
    )


def tent(center: float, half_width: float, height: float = 1.0) -> TestFunction:
    """Return the tent of the given height and half width around ``center``."""
    return TestFunction(
        lambda x: height * np.clip(1.0 - np.abs(x - center) / half_width, 0.0, 1.0),
        abs(height),
        abs(height) / half_width,
        f"tent({center:g},{half_width:g})",
    )


def cosine(frequency: float) -> TestFunction:
    """Return phi(x) = cos(frequency x)."""
    return TestFunction(
        lambda x: np.cos(frequency * x), 1.0, abs(frequency), f"cos({frequency:g})"
    )


def pairing(measure: DiscreteMeasure, f: TestFunction) -> float:
    """Return <mu, phi> = sum_i w_i phi(x_i)."""
    if len(measure) == 0:
        return 0.0
    return measure.pair(f(measure.atoms))


def sample_thinning(spec: ThinningSpec, rng: np.random.Generator) -> DiscreteMeasure:
    """Return a uniform s-subset of the points, each kept point with weight 1/r."""
    if spec.s == 0:
        return DiscreteMeasure.empty()
    chosen = np.sort(rng.choice(spec.r, size=spec.s, replace=False))
    return DiscreteMeasure(spec.points[chosen], np.full(spec.s, 1.0 / spec.r))


def _center(spec: ThinningSpec, values: np.ndarray) -> float:
    # E <mu, phi> = (s/r) <nu, phi>
    return spec.s / spec.r * float(values.mean()) if spec.r else 0.0


def sample_pairings(
    spec: ThinningSpec, f: TestFunction, replicas: int, rng: np.random.Generator
) -> np.ndarray:
    """Return <mu, phi> for ``replicas`` independent thinnings.

    A uniform s-subset is the set of the s smallest of r independent uniform keys.
    """
    values = np.asarray(f(spec.points), dtype=float)
    if spec.s == 0 or spec.r == 0:
        return np.zeros(replicas)
    if spec.s == spec.r:
        return np.full(replicas, values.sum() / spec.r)
    out = np.empty(replicas)
    block = max(1, _CHUNK_ENTRIES // spec.r)
    for start in range(0, replicas, block):
        stop = min(replicas, start + block)
        keys = rng.random((stop - start, spec.r))
        chosen = np.argpartition(keys, spec.s - 1, axis=1)[:, : spec.s]
        out[start:stop] = values[chosen].sum(axis=1) / spec.r
    return out


def deviation_tail(
    spec: ThinningSpec,
    f: TestFunction,
    eps: float,
    replicas: int,
    rng: np.random.Generator,
) -> TailEstimate:
    """Estimate P(|<mu, phi> - (s/r) <nu, phi>| > eps) by Monte Carlo."""
    if eps <= 0:
        raise InvalidStateError("NON_POSITIVE_EPS", f"eps={eps}")
    values = np.asarray(f(spec.points), dtype=float)
    deviations = np.abs(sample_pairings(spec, f, replicas, rng) - _center(spec, values))
    return TailEstimate.from_counts(int(np.count_nonzero(deviations > eps)), replicas)


@functools.lru_cache(maxsize=None)
def revolving_door(r: int, s: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return the (out, in) swaps of the revolving-door order of s-subsets of range(r).

    The order starts at {0, ..., s-1} and consecutive subsets differ by one swap. It
    lists R(r-1, s), then R(r-1, s-1) reversed with r-1 added.
    """
    if s == 0 or s == r:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    head_out, head_in = revolving_door(r - 1, s)
    tail_out, tail_in = revolving_door(r - 1, s - 1)
    bridge = s - 2 if s >= 2 else r - 2
    swaps_out = np.concatenate([head_out, [bridge], tail_in[::-1]]).astype(np.int64)
    swaps_in = np.concatenate([head_in, [r - 1], tail_out[::-1]]).astype(np.int64)
    return swaps_out, swaps_in


def exact_pairing_values(
    spec: ThinningSpec, f: TestFunction, cap: int = EXACT_SUBSETS_CAP
) -> np.ndarray:
    """Return <mu, phi> for every s-subset, in revolving-door order.

    Raises
        CapExceededError: more than ``cap`` subsets.

    """
    count = math.comb(spec.r, spec.s)
    if count > cap:
        raise CapExceededError("SUBSETS_CAP", f"C({spec.r}, {spec.s}) = {count} > {cap}")
    values = np.asarray(f(spec.points), dtype=float)
    swaps_out, swaps_in = revolving_door(spec.r, spec.s)
    first = values[: spec.s].sum()
    steps = np.cumsum(values[swaps_in] - values[swaps_out])
    sums = np.concatenate([[first], first + steps])
    return sums / spec.r if spec.r else sums


def deviation_tail_exact(
    spec: ThinningSpec, f: TestFunction, eps: float, cap: int = EXACT_SUBSETS_CAP
) -> TailEstimate:
    """Return P(|<mu, phi> - (s/r) <nu, phi>| > eps) by enumerating every subset."""
    if eps <= 0:
        raise InvalidStateError("NON_POSITIVE_EPS", f"eps={eps}")
    values = np.asarray(f(spec.points), dtype=float)
    pairings = exact_pairing_values(spec, f, cap=cap)
    deviations = np.abs(pairings - _center(spec, values))
    probability = np.count_nonzero(deviations > eps) / pairings.size
    _LOGGER.debug(
        "Exact thinning tail r=%s s=%s eps=%s over %s subsets: %s",
        spec.r,
        spec.s,
        eps,
        pairings.size,
        probability,
    )
    return TailEstimate.exact(probability)


def maurey_bound(r: int, eps: float, sup_norm: float, clamp: bool = True) -> float:
    """Return 2 exp(-r eps^2 / (64 |phi|_inf^2)), clamped to [0, 1] by default."""
    if r < 1 or eps <= 0 or sup_norm <= 0:
        raise InvalidStateError("BAD_BOUND_ARGUMENTS", f"r={r}, eps={eps}, sup={sup_norm}")
    value = 2.0 * math.exp(-r * eps * eps / (64.0 * sup_norm * sup_norm))
    return min(value, 1.0) if clamp else value


def distance_bound(r: int, eps: float, covering: int, clamp: bool = True) -> float:
    """Return 2 M exp(-r eps^2 / 64), the bound on P(d_BL(mu, (s/r) nu) > 2 eps)."""
    if r < 1 or eps <= 0 or covering < 1:
        raise InvalidStateError("BAD_BOUND_ARGUMENTS", f"r={r}, eps={eps}, M={covering}")
    value = 2.0 * covering * math.exp(-r * eps * eps / 64.0)
    return min(value, 1.0) if clamp else value


def distance_tail(
    spec: ThinningSpec, eps: float, replicas: int, rng: np.random.Generator
) -> TailEstimate:
    """Estimate P(d_BL(mu, (s/r) nu) > 2 eps) by Monte Carlo."""
    if eps <= 0:
        raise InvalidStateError("NON_POSITIVE_EPS", f"eps={eps}")
    target = spec.full.scaled(spec.s / spec.r) if spec.r else DiscreteMeasure.empty()
    hits = sum(
        bl_distance(sample_thinning(spec, rng), target) > 2.0 * eps for _ in range(replicas)
    )
    return TailEstimate.from_counts(int(hits), replicas)
