#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Small statistical helpers shared by the experiments.
"""
from dataclasses import dataclass
import logging
import math
from typing import Tuple

import numpy as np
from scipy import stats

from thinningpy.const import WILSON_Z

_LOGGER = logging.getLogger(__name__)


def wilson_interval(
    successes: int, total: int, z: float = WILSON_Z
) -> Tuple[float, float]:
    """Wilson score interval for Bernoulli outcomes."""
    if total <= 0:
        return (0.0, 1.0)
    p = successes / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (p + z2 / (2.0 * total)) / denom
    margin = (z * math.sqrt(p * (1.0 - p) / total + z2 / (4.0 * total * total))) / denom
    return (max(0.0, center - margin), min(1.0, center + margin))


@dataclass(frozen=True)
class TailEstimate:
    """Tail probability estimate, exact when ``trials == 0``."""

    hits: int
    trials: int
    probability: float

    @classmethod
    def exact(cls, probability: float) -> "TailEstimate":
        """Wrap an exactly computed probability."""
        return cls(hits=0, trials=0, probability=float(probability))

    @classmethod
    def from_counts(cls, hits: int, trials: int) -> "TailEstimate":
        """Build a Monte Carlo estimate from counts."""
        return cls(hits=int(hits), trials=int(trials), probability=hits / trials)

    @property
    def is_exact(self) -> bool:
        """Return whether no sampling was involved."""
        return self.trials == 0

    @property
    def upper(self) -> float:
        """Return the Wilson upper limit, or the exact value."""
        if self.is_exact:
            return self.probability
        return wilson_interval(self.hits, self.trials)[1]

    @property
    def lower(self) -> float:
        """Return the Wilson lower limit, or the exact value."""
        if self.is_exact:
            return self.probability
        return wilson_interval(self.hits, self.trials)[0]


def ks_distance_discrete(support, probabilities, cdf) -> float:
    """Kolmogorov-Smirnov distance between a lattice law and a continuous CDF.

    The supremum of |F(x) - G(x)| for a step function F is attained at an atom, from
    the left or from the right, so both one-sided limits are compared there.
    """
    support = np.asarray(support, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    order = np.argsort(support)
    support = support[order]
    probabilities = probabilities[order]
    right = np.cumsum(probabilities)
    left = right - probabilities
    target = cdf(support)
    return float(max(np.max(np.abs(right - target)), np.max(np.abs(left - target))))


def ks_distance_normal(support, probabilities, mean: float, sd: float) -> float:
    """Return the KS distance of a standardized lattice law to N(0, 1)."""
    standardized = (np.asarray(support, dtype=float) - mean) / sd
    return ks_distance_discrete(standardized, probabilities, stats.norm.cdf)


def chi_square_pvalue(observed, expected_probabilities) -> float:
    """Return the chi-square goodness-of-fit p-value of counts against probabilities."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected_probabilities, dtype=float) * observed.sum()
    return float(stats.chisquare(observed, expected).pvalue)


def log_slope(xs, ys) -> float:
    """Return the least-squares slope of log(y) against log(x) over positive points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if keep.sum() < 2:
        return math.nan
    return float(stats.linregress(np.log(xs[keep]), np.log(ys[keep])).slope)
