#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

For more details about this package, please refer to the README.
"""

__version__ = "0.1.0"
