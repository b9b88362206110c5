#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Closed-form solution of the kinetic equation and its limiting loss law.
"""
import logging
from typing import Text

import numpy as np

from thinningpy.const import RESIDUAL_EXTENT, RESIDUAL_GRID, RESIDUAL_STEP
from thinningpy.exceptions import InvalidStateError
from thinningpy.initial_data import InitialDensity, _output

_LOGGER = logging.getLogger(__name__)


def _times(t) -> np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InvalidStateError("NEGATIVE_TIME", f"t={t}")
    return t_arr


class KineticSolution:
    """Solution f(x, t) = rho(t) f0(x + t) of the kinetic equation.

    The solution only wraps its initial data, so one instance can be shared by every
    replica of an experiment.
    """

    def __init__(self, density: InitialDensity) -> None:
        """Initialize the solution for initial data ``density``."""
        self.density = density

    @property
    def name(self) -> Text:
        """Return the name of the initial data."""
        return self.density.name

    def rho(self, t):
        """Return the survival fraction rho(t) = 1 - F0(t)."""
        return self.density.survival(_times(t))

    def mass(self, t):
        """Return the total mass M(t) = rho(t)^2."""
        rho = np.asarray(self.rho(t))
        return _output(rho * rho, t)

    def loss(self, t):
        """Return the limiting loss L(t) = (1 - rho(t)^2) / 2."""
        rho = np.asarray(self.rho(t))
        return _output(0.5 * (1.0 - rho * rho), t)

    def distribution(self, x, t):
        """Return F(x, t) = rho(t) (F0(x + t) - F0(t))."""
        t_arr = _times(t)
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < 0):
            raise InvalidStateError("NEGATIVE_POSITION", f"x={x}")
        cdf = self.density.cdf
        shifted = np.asarray(cdf(x_arr + t_arr)) - np.asarray(cdf(t_arr))
        value = np.asarray(self.rho(t_arr)) * np.maximum(shifted, 0.0)
        return _output(value, x_arr + t_arr)

    def density_value(self, x, t):
        """Return f(x, t) = rho(t) f0(x + t).

        Raises
            MissingDensityError: the initial data has no pdf.

        """
        t_arr = _times(t)
        x_arr = np.asarray(x, dtype=float)
        value = np.asarray(self.rho(t_arr)) * np.asarray(self.density.pdf(x_arr + t_arr))
        return _output(value, x_arr + t_arr)

    def extinction_time(self) -> float:
        """Return the first time the mass vanishes, infinite for unbounded support."""
        return self.density.extinction_time()

    def residual(
        self,
        step: float = RESIDUAL_STEP,
        grid: int = RESIDUAL_GRID,
        extent: float = RESIDUAL_EXTENT,
    ) -> float:
        """Return the sup of |df/dt - df/dx + f(0,t) f / M(t)| on a square grid.

        Derivatives are central differences of width ``step``. Grid points whose
        stencil crosses a breakpoint of f0, or where the mass vanishes, are skipped.

        Raises
            MissingDensityError: the initial data has no pdf.

        """
        xs, ts = np.meshgrid(
            np.linspace(0.0, extent, grid), np.linspace(0.0, extent, grid), indexing="ij"
        )
        # stencils must stay inside the quadrant
        xs = np.maximum(xs, step)
        ts = np.maximum(ts, step)
        f = self.density_value
        d_t = (f(xs, ts + step) - f(xs, ts - step)) / (2.0 * step)
        d_x = (f(xs + step, ts) - f(xs - step, ts)) / (2.0 * step)
        mass = np.asarray(self.mass(ts))
        keep = mass > 0
        for breakpoint in self.density.pdf_breakpoints:
            keep &= np.abs(xs + ts - breakpoint) > 2.0 * step
        with np.errstate(divide="ignore", invalid="ignore"):
            source = f(np.zeros_like(ts), ts) * f(xs, ts) / mass
        values = np.abs(d_t - d_x + source)[keep]
        worst = float(values.max()) if values.size else 0.0
        _LOGGER.debug(
            "Residual of %s: %s over %s grid points", self.name, worst, values.size
        )
        return worst


def shifted_cdf(density: InitialDensity, x, h):
    """Return (S_h* F0)(x) = F0(x + h) - F0(h)."""
    return _output(
        np.asarray(density.cdf(np.asarray(x, dtype=float) + h)) - float(density.cdf(h)), x
    )
