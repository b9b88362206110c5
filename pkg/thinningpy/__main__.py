#  SPDX-License-Identifier: Apache-2.0
"""Run ``python -m thinningpy``."""
import sys

from thinningpy.cli import main

sys.exit(main())
