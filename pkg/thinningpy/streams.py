#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Counter-based random streams keyed by (seed, experiment, sweep point, replica).
"""
import logging
from typing import Union

import numpy as np

from thinningpy.const import EXPERIMENT_IDS
from thinningpy.exceptions import ConfigError

_LOGGER = logging.getLogger(__name__)


def experiment_id(experiment: Union[str, int]) -> int:
    """Return the numeric id used in stream keys for an experiment name."""
    if isinstance(experiment, int):
        return experiment
    try:
        return EXPERIMENT_IDS[experiment]
    except KeyError:
        raise ConfigError("UNKNOWN_EXPERIMENT", experiment) from None


def stream(
    seed: int, experiment: Union[str, int] = 0, *key: int
) -> np.random.Generator:
    """Return an independent generator for one replica.

    The stream is a Philox (counter based) generator whose key is derived from
    ``SeedSequence(seed, spawn_key=(experiment, *key))``. Identical arguments give
    identical streams regardless of which worker process asks for them.

    Args:
        seed (int): Base seed of the run.
        experiment (Union[str, int]): Experiment name or id.
        key (int): Remaining key components, typically (sweep point, replica).

    Returns
        np.random.Generator

    """
    spawn_key = (experiment_id(experiment),) + tuple(int(k) for k in key)
    sequence = np.random.SeedSequence(int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(sequence))
