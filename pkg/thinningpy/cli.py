#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Command line entry point. Exit status is 0 when every bound holds, 1 when a bound
comparison fails and 2 on invalid input.
"""
import argparse
import logging
import sys
from typing import List, Optional, Sequence, Text, Tuple

import numpy as np

from thinningpy.__version__ import __version__
from thinningpy.const import (
    DEFAULT_C,
    DEFAULT_COVERING,
    DEFAULT_DISC_M,
    DEFAULT_GRID,
    DEFAULT_REPLICAS,
    DEFAULT_SEED,
)
from thinningpy.exceptions import ConfigError, ThinningException
from thinningpy.harness import ExperimentConfig, all_bounds_ok, emit, run_experiment
from thinningpy.initial_data import parse_density, quantile_init
from thinningpy.kinetic import KineticSolution
from thinningpy.metrics import DiscreteMeasure, bl_distance, bl_distance_oracle
from thinningpy.particle_system import loss_path, simulate, sup_loss_deviation
from thinningpy.streams import stream
from thinningpy.urn import UrnSpec, exact_pmf, write_pmf_csv

_LOGGER = logging.getLogger(__name__)

EXPERIMENTS = {
    "verify-loss": "loss",
    "urn": "urn_clt",
    "thin": "thinning",
    "verify-one-point": "one_point",
    "verify-emp": "uniform_emp",
}


def _numbers(kind):
    def parse(text: Text) -> List:
        try:
            return [kind(item) for item in text.split(",") if item]
        except ValueError:
            message = f"not a list of {kind.__name__}: {text}"
            raise argparse.ArgumentTypeError(message) from None

    return parse


def _flatten(groups: Optional[Sequence[Sequence]]) -> Optional[Tuple]:
    if groups is None:
        return None
    return tuple(value for group in groups for value in group)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=_numbers(int), nargs="+", help="particle counts")
    parser.add_argument("--replicas", type=int, default=DEFAULT_REPLICAS)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument(
        "--density", default="uniform", help="uniform | exp:<rate> | file:<path>"
    )
    parser.add_argument("--eps", type=_numbers(float), nargs="+")
    parser.add_argument("--times", type=_numbers(float), nargs="+")
    parser.add_argument("--fractions", type=_numbers(float), nargs="+")
    parser.add_argument("--horizon", type=float, default=0.9)
    parser.add_argument("--grid", type=int, default=DEFAULT_GRID)
    parser.add_argument("--disc-m", type=int, default=DEFAULT_DISC_M)
    parser.add_argument("--c-const", type=float, default=DEFAULT_C)
    parser.add_argument("--covering", type=int, default=DEFAULT_COVERING)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--timing", action="store_true", help="record runtime_ms")
    parser.add_argument(
        "--jump-times", action="store_true", help="add trajectory jump times to the grid"
    )


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser with one subcommand per experiment."""
    parser = argparse.ArgumentParser(
        prog="thinningpy",
        description="Simulate removal-driven thinning and verify its concentration bounds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    simulate_parser = commands.add_parser("simulate", help="simulate one trajectory")
    _common(simulate_parser)

    urn_parser = commands.add_parser("urn", help="urn tabulation or CLT sweep")
    _common(urn_parser)
    urn_parser.add_argument("--r", type=int, help="tabulate the law of X for this r")

    for name, help_text in (
        ("thin", "thinning tails against their bounds"),
        ("verify-loss", "loss concentration"),
        ("verify-one-point", "one-point concentration"),
        ("verify-emp", "uniform concentration of the empirical measure"),
    ):
        _common(commands.add_parser(name, help=help_text))

    bl_parser = commands.add_parser("bl", help="bounded-Lipschitz distance")
    bl_parser.add_argument("--mu", required=True, help="x:w,x:w,... or file:<path>")
    bl_parser.add_argument("--nu", required=True, help="x:w,x:w,... or file:<path>")
    bl_parser.add_argument(
        "--oracle", action="store_true", help="also run vertex enumeration"
    )
    return parser


def parse_measure(text: Text) -> DiscreteMeasure:
    """Parse ``x:w,x:w,...`` or ``file:<path>`` (two columns x w) into a measure."""
    if text.startswith("file:"):
        try:
            rows = np.loadtxt(text[len("file:"):], comments="#", ndmin=2)
        except (OSError, ValueError) as exception_:
            raise ConfigError("BAD_MEASURE", str(exception_)) from exception_
        return DiscreteMeasure.from_atoms(rows[:, 0], rows[:, 1])
    atoms, weights = [], []
    for item in filter(None, text.split(",")):
        position, _, weight = item.partition(":")
        try:
            atoms.append(float(position))
            weights.append(float(weight) if weight else 1.0)
        except ValueError:
            raise ConfigError("BAD_MEASURE", item) from None
    return DiscreteMeasure.from_atoms(atoms, weights)


def _config(args, kind: Text) -> ExperimentConfig:
    overrides = {
        "ns": _flatten(args.n),
        "eps": _flatten(args.eps),
        "times": _flatten(args.times),
        "fractions": _flatten(args.fractions),
    }
    return ExperimentConfig(
        kind=kind,
        density=args.density,
        horizon=args.horizon,
        grid=args.grid,
        replicas=args.replicas,
        seed=args.seed,
        disc_m=args.disc_m,
        c_const=args.c_const,
        covering=args.covering,
        workers=args.workers,
        jump_times=args.jump_times,
        timing=args.timing,
        **{key: value for key, value in overrides.items() if value is not None},
    )


def _simulate(args) -> int:
    ns = _flatten(args.n) or (1000,)
    density = parse_density(args.density)
    solution = KineticSolution(density)
    for point, n in enumerate(ns):
        rng = stream(args.seed, "simulate", point, 0)
        traj = simulate(quantile_init(n, density), rng)
        deviation = sup_loss_deviation(loss_path(traj), solution)
        _LOGGER.info("n=%s: sup |L^n - L| = %s", n, deviation)
        path = args.out if len(ns) == 1 or args.out == "-" else f"{args.out}.{n}"
        traj.to_csv(path)
    return 0


def _tabulate(args) -> int:
    ns = _flatten(args.n)
    if not ns or len(ns) != 1:
        raise ConfigError("BAD_SWEEP", "urn tabulation needs exactly one --n")
    distribution = exact_pmf(UrnSpec(ns[0], args.r))
    write_pmf_csv(distribution, args.out)
    return 0


def _bl(args) -> int:
    mu = parse_measure(args.mu)
    nu = parse_measure(args.nu)
    print(repr(bl_distance(mu, nu)))
    if args.oracle:
        print(repr(bl_distance_oracle(mu, nu)))
    return 0


def _experiment(args, kind: Text) -> int:
    rows = run_experiment(_config(args, kind))
    emit(rows, args.out, args.format)
    if all_bounds_ok(rows):
        _LOGGER.info("All %s bound comparisons hold", len(rows))
        return 0
    _LOGGER.info("Some bound comparisons failed or were inconclusive")
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line interface and return its exit status."""
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "bl":
            return _bl(args)
        if args.command == "urn" and args.r is not None:
            return _tabulate(args)
        return _experiment(args, EXPERIMENTS[args.command])
    except ThinningException as exception_:
        print(exception_.message, file=sys.stderr)
        return 2
