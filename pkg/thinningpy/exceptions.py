#  SPDX-License-Identifier: Apache-2.0
"""
Python Package for simulating and verifying removal-driven thinning.

For more details about this package, please refer to the README.
"""
import logging

_LOGGER = logging.getLogger(__name__)


class ThinningException(Exception):
    """Class of thinningpy exceptions."""

    def __init__(self, code, *args, **kwargs):
        """Initialize exceptions for thinningpy.

        Args:
            code (Text): Short upper-case error code, e.g. ``"ODD_PARTICLE_COUNT"``.
            args: Human readable details passed on to ``Exception``.

        """
        self.message = ""
        super().__init__(*args, **kwargs)
        self.code = code
        if isinstance(code, str):
            self.message = self.code
            if args:
                self.message = f"{self.code}: {args[0]}"
            return
        self.message = "UNKNOWN_ERROR"

    def __str__(self):
        """Return the message."""
        return self.message


class InvalidDensityError(ThinningException):
    """Class of exceptions for rejected initial data."""

    pass


class InvalidStateError(ThinningException):
    """Class of exceptions for particle, urn or measure inputs breaking invariants."""

    pass


class MissingDensityError(ThinningException):
    """Class of exceptions for pdf evaluation on CDF-only initial data."""

    pass


class CapExceededError(ThinningException):
    """Class of exceptions for exact computations beyond their configured cap."""

    pass


class OverflowGuardError(ThinningException):
    """Class of exceptions for MGF arguments beyond the configured u-cap."""

    pass


class ConfigError(ThinningException):
    """Class of exceptions for invalid experiment configuration."""

    pass
