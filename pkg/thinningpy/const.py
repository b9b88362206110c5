#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Numeric defaults. Every function using one of these takes it as a keyword argument.
"""

# urn
EXACT_PMF_CAP = 5000
MGF_U_CAP = 8.0

# thinning
EXACT_SUBSETS_CAP = 2_000_000

# metrics
ORACLE_MAX_ATOMS = 8

# initial data: generic CDFs
MODULUS_GRID_POINTS = 100_000
MODULUS_TAIL_EPS = 1e-6
NORMALIZATION_TOL = 1e-9

# kinetic residual check
RESIDUAL_STEP = 1e-4
RESIDUAL_GRID = 100
RESIDUAL_EXTENT = 0.9

# harness
WILSON_Z = 2.5758293035489004  # two-sided 99%
DEFAULT_C = 1.0
DEFAULT_COVERING = 10
DEFAULT_DISC_M = 100_000
DEFAULT_GRID = 20
DEFAULT_REPLICAS = 100
DEFAULT_SEED = 0

CSV_COLUMNS = (
    "experiment",
    "n",
    "r",
    "s",
    "t",
    "eps",
    "replicas",
    "tail_hat",
    "wilson_hi",
    "bound",
    "bound_ok",
    "disc_err",
    "seed",
    "runtime_ms",
    "check",
    "stat",
    "stat_hi",
    "below_n_eps",
)

EXPERIMENT_IDS = {
    "simulate": 0,
    "loss": 1,
    "urn_clt": 2,
    "thinning": 3,
    "one_point": 4,
    "uniform_emp": 5,
}
