#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

For more details about this package, please refer to the README.
"""
from thinningpy.exceptions import (
    CapExceededError,
    ConfigError,
    InvalidDensityError,
    InvalidStateError,
    MissingDensityError,
    OverflowGuardError,
    ThinningException,
)
from thinningpy.harness import (
    BoundSpec,
    ExperimentConfig,
    Harness,
    ResultRow,
    emit,
    run_experiment,
)
from thinningpy.initial_data import (
    CallableCdf,
    Exponential,
    InitialDensity,
    PiecewiseCdf,
    Uniform01,
    parse_density,
    quantile_init,
)
from thinningpy.kinetic import KineticSolution
from thinningpy.metrics import DiscreteMeasure, bl_distance, bl_distance_oracle
from thinningpy.particle_system import Trajectory, loss_path, simulate
from thinningpy.thinning import TestFunction, ThinningSpec
from thinningpy.urn import UrnDistribution, UrnSpec, exact_pmf

from .__version__ import __version__

__all__ = [
    "CapExceededError",
    "ConfigError",
    "InvalidDensityError",
    "InvalidStateError",
    "MissingDensityError",
    "OverflowGuardError",
    "ThinningException",
    "BoundSpec",
    "ExperimentConfig",
    "Harness",
    "ResultRow",
    "emit",
    "run_experiment",
    "CallableCdf",
    "Exponential",
    "InitialDensity",
    "PiecewiseCdf",
    "Uniform01",
    "parse_density",
    "quantile_init",
    "KineticSolution",
    "DiscreteMeasure",
    "bl_distance",
    "bl_distance_oracle",
    "Trajectory",
    "loss_path",
    "simulate",
    "TestFunction",
    "ThinningSpec",
    "UrnDistribution",
    "UrnSpec",
    "exact_pmf",
    "__version__",
]
