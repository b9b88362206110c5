#!/usr/bin/env python
# -*- coding: utf-8 -*-
#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

For more details about this package, please refer to the README.
"""
import io
import os

from setuptools import find_packages, setup

NAME = "thinningpy"
DESCRIPTION = "Simulator and verification harness for removal-driven thinning."
URL = "https://github.com/thinningpy/thinningpy"
AUTHOR = "thinningpy developers"
REQUIRES_PYTHON = ">=3.8"
LICENSE = "Apache-2.0"

REQUIRED = ["numba>=0.53", "numpy>=1.20", "scipy>=1.6"]
EXTRAS = {"test": ["pytest", "pytest-cov"]}

HERE = os.path.abspath(os.path.dirname(__file__))

try:
    with io.open(os.path.join(HERE, "README.md"), encoding="utf-8") as f:
        LONG_DESCRIPTION = "\n" + f.read()
except FileNotFoundError:
    LONG_DESCRIPTION = DESCRIPTION

ABOUT = {}
with open(os.path.join(HERE, NAME, "__version__.py")) as f:
    exec(f.read(), ABOUT)  # pylint: disable=exec-used

setup(
    name=NAME,
    version=ABOUT["__version__"],
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    author=AUTHOR,
    python_requires=REQUIRES_PYTHON,
    url=URL,
    packages=find_packages(exclude=("tests",)),
    entry_points={"console_scripts": ["thinningpy=thinningpy.cli:main"]},
    install_requires=REQUIRED,
    extras_require=EXTRAS,
    include_package_data=True,
    license=LICENSE,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
