#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Initial data F0 of the kinetic equation and quantile initialization of particles.
"""
import logging
import math
from typing import Callable, Optional, Sequence, Text, Tuple

import numpy as np
from scipy.optimize import brentq

from thinningpy.const import (
    MODULUS_GRID_POINTS,
    MODULUS_TAIL_EPS,
    NORMALIZATION_TOL,
)
from thinningpy.exceptions import (
    InvalidDensityError,
    InvalidStateError,
    MissingDensityError,
)

_LOGGER = logging.getLogger(__name__)


def _output(values: np.ndarray, like):
    """Return a float for scalar input, an array otherwise."""
    if np.ndim(like) == 0:
        return float(values)
    return values


class InitialDensity:
    """Initial distribution F0 on the half-line.

    Subclasses provide the CDF and its left-continuous inverse. Instances are
    immutable after construction and may be shared between replicas.
    """

    name: Text = "density"
    has_pdf: bool = False
    pdf_breakpoints: Tuple[float, ...] = ()

    def cdf(self, x):
        """Return F0(x); zero for x <= 0."""
        x_arr = np.asarray(x, dtype=float)
        return _output(self._cdf(np.maximum(x_arr, 0.0)), x)

    def survival(self, x):
        """Return 1 - F0(x)."""
        return _output(1.0 - np.asarray(self.cdf(x), dtype=float), x)

    def quantile(self, p):
        """Return the left-continuous inverse inf{x >= 0: F0(x) >= p}.

        Defined on the closed interval [0, 1]; quantile(1) is the right end of the
        support and may be infinite.
        """
        p_arr = np.asarray(p, dtype=float)
        if np.any((p_arr < 0.0) | (p_arr > 1.0)):
            raise InvalidStateError("PROBABILITY_OUT_OF_RANGE", f"p={p}")
        return _output(self._quantile(p_arr), p)

    def pdf(self, x):
        """Return f0(x); only available for densities built with a pdf."""
        if not self.has_pdf:
            raise MissingDensityError("NO_PDF", f"{self.name} is defined by its CDF only")
        x_arr = np.asarray(x, dtype=float)
        return _output(self._pdf(x_arr), x)

    def tail_certificate(self, eps: float) -> float:
        """Return x* with 1 - F0(x*) < eps."""
        if not 0.0 < eps < 1.0:
            raise InvalidStateError("EPS_OUT_OF_RANGE", f"eps={eps}")
        return float(self.quantile(1.0 - eps / 2.0))

    def continuity_modulus(self, h: float) -> float:
        """Return omega(h; F0) = sup_x F0(x + h) - F0(x)."""
        if h <= 0:
            raise InvalidStateError("NON_POSITIVE_WIDTH", f"h={h}")
        return float(min(1.0, self._modulus(h)))

    def modulus_bounds(self, h: float) -> Tuple[float, float]:
        """Return certified (lower, upper) bounds of omega(h; F0).

        Closed-form and piecewise densities are exact, so both bounds coincide.
        """
        value = self.continuity_modulus(h)
        return (value, value)

    def extinction_time(self) -> float:
        """Return inf{t: F0(t) = 1}, the time the kinetic solution vanishes."""
        return float(self.quantile(1.0))

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _quantile(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _modulus(self, h: float) -> float:
        raise NotImplementedError

    def __repr__(self):
        """Return the density name."""
        return f"<{type(self).__name__} {self.name}>"


class Uniform01(InitialDensity):
    """Uniform density on (0, 1]."""

    name = "uniform01"
    has_pdf = True
    pdf_breakpoints = (0.0, 1.0)

    def _cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def survival(self, x):
        """Return 1 - x clipped to [0, 1]."""
        return _output(np.clip(1.0 - np.asarray(x, dtype=float), 0.0, 1.0), x)

    def _quantile(self, p):
        return p.copy()

    def _pdf(self, x):
        return ((x >= 0.0) & (x <= 1.0)).astype(float)

    def _modulus(self, h):
        return min(h, 1.0)


class Exponential(InitialDensity):
    """Exponential density with the given rate."""

    has_pdf = True
    pdf_breakpoints = (0.0,)

    def __init__(self, rate: float = 1.0) -> None:
        """Initialize the density.

        Args:
            rate (float): Positive rate of the exponential law.

        Raises
            InvalidDensityError

        """
        if not rate > 0 or not math.isfinite(rate):
            raise InvalidDensityError("NEGATIVE_RATE", f"rate={rate}")
        self.rate = float(rate)
        self.name = f"exponential({self.rate:g})"

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def survival(self, x):
        """Return exp(-rate x) for x >= 0."""
        x_arr = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _output(np.exp(-self.rate * x_arr), x)

    def _quantile(self, p):
        with np.errstate(divide="ignore"):
            return -np.log1p(-p) / self.rate

    def _pdf(self, x):
        return np.where(x >= 0.0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _modulus(self, h):
        # f0 is decreasing, so the heaviest window starts at the origin
        return float(-math.expm1(-self.rate * h))


class PiecewiseCdf(InitialDensity):
    """Piecewise-linear CDF given by a table of breakpoints (x, F)."""

    def __init__(
        self, xs: Sequence[float], fs: Sequence[float], name: Text = "piecewise"
    ) -> None:
        """Initialize from the breakpoint table.

        Args:
            xs (Sequence[float]): Strictly increasing abscissae starting at 0.
            fs (Sequence[float]): Nondecreasing CDF values starting at 0 and ending at 1.
            name (str): Label used in logs and result rows.

        Raises
            InvalidDensityError: the table is not a valid normalized CDF.

        """
        xs = np.asarray(xs, dtype=float)
        fs = np.asarray(fs, dtype=float)
        if xs.ndim != 1 or xs.shape != fs.shape or xs.size < 2:
            raise InvalidDensityError("BAD_TABLE_SHAPE", "need two equal columns of length >= 2")
        if xs[0] != 0.0 or fs[0] != 0.0:
            raise InvalidDensityError("TABLE_NOT_AT_ORIGIN", "table must start at (0, 0)")
        if np.any(np.diff(xs) <= 0):
            raise InvalidDensityError("NON_MONOTONE_TABLE", "x column must be strictly increasing")
        if np.any(np.diff(fs) < 0) or np.any(fs < 0):
            raise InvalidDensityError("NON_MONOTONE_TABLE", "F column must be nondecreasing")
        if abs(fs[-1] - 1.0) > NORMALIZATION_TOL or np.any(fs > 1.0 + NORMALIZATION_TOL):
            raise InvalidDensityError("UNNORMALIZED", f"F column ends at {fs[-1]}")
        fs = np.minimum(fs, 1.0)
        fs[-1] = 1.0
        self.xs = xs
        self.fs = fs
        self.name = name
        self.pdf_breakpoints = tuple(xs.tolist())

    def _cdf(self, x):
        return np.interp(x, self.xs, self.fs)

    def _quantile(self, p):
        index = np.searchsorted(self.fs, p, side="left")
        out = np.zeros_like(p, dtype=float)
        inner = index > 0
        i = index[inner]
        f_lo = self.fs[i - 1]
        f_hi = self.fs[i]
        x_lo = self.xs[i - 1]
        x_hi = self.xs[i]
        out[inner] = x_lo + (p[inner] - f_lo) / (f_hi - f_lo) * (x_hi - x_lo)
        return out

    def _modulus(self, h):
        # F(x+h) - F(x) is piecewise linear in x with kinks at xs and xs - h
        candidates = np.concatenate([self.xs, self.xs - h])
        candidates = candidates[candidates >= 0.0]
        return float(np.max(self._cdf(candidates + h) - self._cdf(candidates)))


class CallableCdf(InitialDensity):
    """Initial data given by an arbitrary CDF callable, with an optional pdf."""

    def __init__(
        self,
        cdf: Callable[[float], float],
        pdf: Optional[Callable[[float], float]] = None,
        name: Text = "callable",
        grid_points: int = MODULUS_GRID_POINTS,
        tail_eps: float = MODULUS_TAIL_EPS,
    ) -> None:
        """Initialize and validate the normalization of the CDF.

        Args:
            cdf (Callable): Vectorizable CDF with cdf(0) = 0 and limit 1.
            pdf (Callable, optional): Density of ``cdf``.
            name (Text): Label used in logs.
            grid_points (int): Grid size for the continuity modulus.
            tail_eps (float): Tail mass ignored by the modulus grid.

        Raises
            InvalidDensityError

        """
        self._user_cdf = np.vectorize(cdf, otypes=[float])
        self._user_pdf = np.vectorize(pdf, otypes=[float]) if pdf is not None else None
        self.has_pdf = pdf is not None
        self.name = name
        if abs(float(self._user_cdf(0.0))) > NORMALIZATION_TOL:
            raise InvalidDensityError("TABLE_NOT_AT_ORIGIN", "cdf(0) must be 0")
        self._upper = self._bracket(1.0 - NORMALIZATION_TOL)
        if self._upper is None:
            raise InvalidDensityError("UNNORMALIZED", "cdf does not approach 1")
        self.grid_end = self.tail_certificate(tail_eps)
        self.tail_eps = tail_eps
        self._grid = np.linspace(0.0, self.grid_end, grid_points)
        self._grid_cdf = self._user_cdf(self._grid)
        self.modulus_resolution = self.grid_end / (grid_points - 1)
        _LOGGER.debug(
            "Modulus grid for %s: %s points up to %s (step %s)",
            name,
            grid_points,
            self.grid_end,
            self.modulus_resolution,
        )

    def _bracket(self, level: float) -> Optional[float]:
        upper = 1.0
        for _ in range(64):
            if float(self._user_cdf(upper)) >= level:
                return upper
            upper *= 2.0
        return None

    def _cdf(self, x):
        return np.clip(self._user_cdf(x), 0.0, 1.0)

    def _pdf(self, x):
        return np.where(x >= 0.0, self._user_pdf(np.maximum(x, 0.0)), 0.0)

    def _invert(self, level: float) -> float:
        if level <= 0.0:
            return 0.0
        upper = self._bracket(level)
        if upper is None:
            return math.inf
        if float(self._user_cdf(upper)) == level:
            return upper
        return brentq(lambda x: float(self._user_cdf(x)) - level, 0.0, upper, xtol=1e-14)

    def _quantile(self, p):
        flat = np.array([self._invert(level) for level in np.ravel(p)], dtype=float)
        return flat.reshape(np.shape(p))

    def _grid_sup(self, h: float) -> float:
        return float(np.max(self._user_cdf(self._grid + h) - self._grid_cdf))

    def _modulus(self, h):
        return self._grid_sup(h)

    def modulus_bounds(self, h: float) -> Tuple[float, float]:
        """Return (grid sup, certified upper bound) of omega(h; F0).

        Between grid points F0(x + h) - F0(x) is at most the grid value at width
        h + step; beyond the grid it is at most the ignored tail mass. With a pdf the
        upper bound is tightened by a Lipschitz estimate of F0 on the grid.
        """
        lower = self.continuity_modulus(h)
        step = self.modulus_resolution
        upper = max(self._grid_sup(h + step), self.tail_eps)
        if self.has_pdf:
            lipschitz = float(np.max(self._pdf(self._grid)))
            upper = min(upper, max(lower + 2.0 * lipschitz * step, self.tail_eps))
        return (lower, min(1.0, upper))


def make_builtin(
    family: Text, rate: Optional[float] = None, table=None
) -> InitialDensity:
    """Return one of the builtin initial densities.

    Args:
        family (Text): ``"uniform01"``, ``"exponential"`` or ``"piecewise_cdf"``.
        rate (float, optional): Rate of the exponential family. Defaults to 1.
        table (optional): Rows (x, F) of a piecewise-linear CDF.

    Raises
        InvalidDensityError

    """
    if family in ("uniform01", "uniform"):
        return Uniform01()
    if family in ("exponential", "exp"):
        return Exponential(1.0 if rate is None else rate)
    if family in ("piecewise_cdf", "piecewise"):
        if table is None:
            raise InvalidDensityError("BAD_TABLE_SHAPE", "piecewise_cdf needs a table")
        rows = np.asarray(table, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 2:
            raise InvalidDensityError("BAD_TABLE_SHAPE", "table rows must be (x, F)")
        return PiecewiseCdf(rows[:, 0], rows[:, 1])
    raise InvalidDensityError("UNKNOWN_FAMILY", family)


def load_piecewise_cdf(path) -> PiecewiseCdf:
    """Read a piecewise CDF from a two-column text file ``x F``; '#' lines are comments."""
    try:
        rows = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as exception_:
        raise InvalidDensityError("UNREADABLE_TABLE", str(exception_)) from exception_
    if rows.shape[1] != 2:
        raise InvalidDensityError("BAD_TABLE_SHAPE", f"{path}: expected two columns")
    _LOGGER.debug("Loaded %s breakpoints from %s", rows.shape[0], path)
    return PiecewiseCdf(rows[:, 0], rows[:, 1], name=f"file:{path}")


def parse_density(spec: Text) -> InitialDensity:
    """Parse the CLI syntax ``uniform``, ``exp:<rate>`` or ``file:<path>``."""
    if spec in ("uniform", "uniform01"):
        return Uniform01()
    if spec.startswith("exp"):
        _, _, rate = spec.partition(":")
        try:
            return Exponential(float(rate) if rate else 1.0)
        except ValueError:
            raise InvalidDensityError("BAD_RATE", spec) from None
    if spec.startswith("file:"):
        return load_piecewise_cdf(spec[len("file:"):])
    raise InvalidDensityError("UNKNOWN_FAMILY", spec)


def quantile_init(n: int, density: InitialDensity) -> np.ndarray:
    """Return the initial positions a_k = F0^{-1}((2k - 1) / (2n)), k = 1..n.

    Args:
        n (int): Even number of particles, n >= 2.
        density (InitialDensity): Initial data.

    Raises
        InvalidStateError

    Returns
        np.ndarray: Nondecreasing positions.

    """
    if n < 2:
        raise InvalidStateError("TOO_FEW_PARTICLES", f"n={n}")
    if n % 2:
        raise InvalidStateError("ODD_PARTICLE_COUNT", f"n={n}")
    levels = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return np.asarray(density.quantile(levels), dtype=float)
