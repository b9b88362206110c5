#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

The diminishing urn: whites are removed one at a time, each together with a uniformly
chosen companion, until no white is left. X_{n,r} is the number of reds left and
d_{n,r} = (n - X_{n,r}) / 2 the number of draws.
"""
import csv
from dataclasses import dataclass
import logging
import math

import numpy as np

from thinningpy.const import EXACT_PMF_CAP, MGF_U_CAP
from thinningpy.exceptions import (
    CapExceededError,
    InvalidStateError,
    OverflowGuardError,
)
from thinningpy.output import open_output
from thinningpy.stats import ks_distance_normal

_LOGGER = logging.getLogger(__name__)

PMF_COLUMNS = ("n", "r", "x", "probability")


@dataclass(frozen=True)
class UrnSpec:
    """Urn with n balls of which r are red and n - r white."""

    n: int
    r: int

    def __post_init__(self):
        """Validate the ball counts."""
        if self.n < 0 or not 0 <= self.r <= self.n:
            raise InvalidStateError("BAD_URN", f"n={self.n}, r={self.r}")

    @property
    def whites(self) -> int:
        """Return the number of white balls."""
        return self.n - self.r

    @property
    def rho(self) -> float:
        """Return the red fraction r / n."""
        return self.r / self.n if self.n else 0.0


def phi(rho):
    """Return the limit of X_{n,r} / n, phi(rho) = rho^2."""
    return np.square(rho)


def psi(rho):
    """Return the limiting variance of X_{n,r} / sqrt(n), psi(rho) = 2 rho^2 (1 - rho)^2."""
    return 2.0 * np.square(rho) * np.square(1.0 - np.asarray(rho, dtype=float))


@dataclass(frozen=True, eq=False)
class UrnDistribution:
    """Law of X_{n,r} on its support."""

    spec: UrnSpec
    support: np.ndarray
    probabilities: np.ndarray

    @property
    def mean(self) -> float:
        """Return E[X]."""
        return float(np.dot(self.support, self.probabilities))

    @property
    def variance(self) -> float:
        """Return Var[X]."""
        centred = self.support - self.mean
        return float(np.dot(centred * centred, self.probabilities))

    def cdf(self, x) -> float:
        """Return P(X <= x)."""
        return float(self.probabilities[self.support <= x].sum())

    def pmf(self, x: int) -> float:
        """Return P(X = x)."""
        return float(self.probabilities[self.support == x].sum())

    def draws(self) -> "UrnDistribution":
        """Return the law of the draw count d = (n - X) / 2 on the same spec."""
        order = np.argsort(self.spec.n - self.support)
        return UrnDistribution(
            self.spec, ((self.spec.n - self.support) // 2)[order], self.probabilities[order]
        )

    def tail_probability(self, eps: float) -> float:
        """Return P(|X/n - phi(r/n)| > eps), summed over the tail atoms."""
        n, r = self.spec.n, self.spec.r
        gap = np.abs(self.support * n - r * r)
        return float(self.probabilities[gap > eps * n * n].sum())

    def draws_tail_probability(self, eps: float) -> float:
        """Return P(|d/n - (1 - phi(r/n)) / 2| > eps)."""
        n, r = self.spec.n, self.spec.r
        # 2 n d - n (n - r^2 / n) = r^2 - n X
        gap = np.abs(self.support * n - r * r)
        return float(self.probabilities[gap > 2.0 * eps * n * n].sum())

    def ks_normal(self) -> float:
        """Return the KS distance of (X - n phi) / sqrt(n psi) to the standard normal."""
        n = self.spec.n
        rho = self.spec.rho
        sd = math.sqrt(n * float(psi(rho)))
        if sd == 0:
            raise InvalidStateError("DEGENERATE_LAW", f"psi({rho}) = 0")
        return ks_distance_normal(self.support, self.probabilities, n * float(phi(rho)), sd)


def simulate_urn(spec: UrnSpec, rng: np.random.Generator) -> int:
    """Run the urn once and return the terminal red count."""
    whites, reds = spec.whites, spec.r
    while whites:
        whites -= 1
        remaining = whites + reds
        if remaining:
            if rng.integers(remaining) < reds:
                reds -= 1
            else:
                whites -= 1
    return reds


def exact_pmf(spec: UrnSpec, cap: int = EXACT_PMF_CAP) -> UrnDistribution:
    """Return the exact law of X_{n,r}.

    Dynamic program over the number of draws k: after k draws the urn holds n - 2k
    balls, so the state is the red count alone. A single white with nothing left
    beside it is removed without a companion.

    Args:
        spec (UrnSpec): Urn to analyse.
        cap (int): Largest n accepted.

    Raises
        CapExceededError

    Returns
        UrnDistribution: law of X on {0, ..., r}, zero atoms dropped.

    """
    n, r = spec.n, spec.r
    if n > cap:
        raise CapExceededError("PMF_CAP", f"n={n} > {cap}")
    reds = np.arange(r + 1)
    pmf = np.zeros(r + 1)
    current = np.zeros(r + 1)
    current[r] = 1.0
    for draws in range(n // 2 + 1):
        total = n - 2 * draws
        whites = total - reds
        done = whites == 0
        pmf[done] += current[done]
        active = whites >= 1
        if total <= 1:
            # a lone white, removed without a companion
            pmf[active] += current[active]
            break
        remaining = total - 1
        stay = np.where(active, (whites - 1) / remaining, 0.0) * current
        down = np.where(active, reds / remaining, 0.0) * current
        current = stay
        current[:-1] += down[1:]
    keep = pmf > 0
    _LOGGER.debug("Exact pmf of X(%s, %s): total mass %s", n, r, pmf.sum())
    return UrnDistribution(spec, reds[keep], pmf[keep])


def exact_mean(spec: UrnSpec) -> float:
    """Return E[X_{n,r}] = r (r - 1) / (n - 1), which solves the mean recurrence."""
    n, r = spec.n, spec.r
    if n <= 1:
        return float(r)
    return r * (r - 1) / (n - 1)


def log_mgf_recurrence(spec: UrnSpec, z, u_cap: float = MGF_U_CAP):
    """Return log f_{n,r}(z) = log E[exp(z X_{n,r})] from the first-draw recurrence.

    f_{m,j} = (1 - j/(m-1)) f_{m-2,j} + (j/(m-1)) f_{m-2,j-1} with f_{m,m} = e^{mz},
    evaluated bottom-up in log space and vectorized over z.

    Raises
        OverflowGuardError: |z| sqrt(n) exceeds ``u_cap``.

    """
    n, r = spec.n, spec.r
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(np.abs(z_arr) * math.sqrt(n) > u_cap):
        raise OverflowGuardError("MGF_U_CAP", f"|z| sqrt(n) > {u_cap}")
    start = n % 2
    table = np.zeros((z_arr.size, 1))
    if start == 1 and r >= 1:
        table = np.stack([np.zeros_like(z_arr), z_arr], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        for m in range(start + 2, n + 1, 2):
            width = min(m, r) + 1
            previous = table.shape[1]
            reds = np.arange(width)
            log_white = np.log1p(-reds[:previous] / (m - 1))
            log_red = np.log(reds / (m - 1))
            new = np.full((z_arr.size, width), -np.inf)
            new[:, :previous] = log_white + table
            upto = min(width, previous + 1)
            from_red = log_red[1:upto] + table[:, : upto - 1]
            new[:, 1:upto] = np.logaddexp(new[:, 1:upto], from_red)
            if width == m + 1:
                new[:, m] = m * z_arr
            table = new
    result = table[:, r]
    return float(result[0]) if np.ndim(z) == 0 else result


def mgf_recurrence(spec: UrnSpec, z, u_cap: float = MGF_U_CAP):
    """Return f_{n,r}(z) = E[exp(z X_{n,r})]."""
    return np.exp(log_mgf_recurrence(spec, z, u_cap=u_cap))


def log_gaussian_ansatz(spec: UrnSpec, z):
    """Return log g_{n,r}(z) = z n phi(r/n) + z^2 n psi(r/n) / 2."""
    z = np.asarray(z, dtype=float)
    rho = spec.rho
    value = z * spec.n * phi(rho) + 0.5 * z * z * spec.n * psi(rho)
    return float(value) if value.ndim == 0 else value


def gaussian_ansatz(spec: UrnSpec, z):
    """Return g_{n,r}(z), the Laplace transform of N(n phi, n psi)."""
    return np.exp(log_gaussian_ansatz(spec, z))


def draws_from_terminal(n: int, x: int) -> int:
    """Return the draw count (n - x) / 2.

    Raises
        InvalidStateError: x out of range or of the wrong parity.

    """
    if not 0 <= x <= n:
        raise InvalidStateError("TERMINAL_OUT_OF_RANGE", f"x={x}, n={n}")
    if (n - x) % 2:
        raise InvalidStateError("PARITY_VIOLATION", f"n - x = {n - x} is odd")
    return (n - x) // 2


def write_pmf_csv(distribution: UrnDistribution, path) -> None:
    """Write rows (n, r, x, probability) followed by mean and variance summary rows."""
    n, r = distribution.spec.n, distribution.spec.r
    with open_output(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PMF_COLUMNS)
        for x, probability in zip(
            distribution.support.tolist(), distribution.probabilities.tolist()
        ):
            writer.writerow((n, r, x, repr(probability)))
        writer.writerow((n, r, "mean", repr(distribution.mean)))
        writer.writerow((n, r, "variance", repr(distribution.variance)))
