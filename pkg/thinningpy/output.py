#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

Output destinations shared by the CSV writers.
"""
import contextlib
import sys


def open_output(path):
    """Open ``path`` for writing; "-" is standard output, left open on exit."""
    if path == "-":
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", newline="")
