"""Exception hierarchy for the Baer subplane engine."""
from typing import Optional


class BaerSaxlError(Exception):
    """Base class for every error raised by this package."""


class FieldError(BaerSaxlError):
    """Invalid field parameters or an undefined field operation."""


class GeometryError(BaerSaxlError):
    """Invalid points, lines, bases or subplane arguments."""


class GroupError(BaerSaxlError):
    """Group-level failures: bad generators, orbit overflow, order cap."""


class CensusError(BaerSaxlError):
    """A point stabilizer fell outside the known subgroup catalogue."""


class LabError(BaerSaxlError):
    """Invalid input to a bound-laboratory computation."""


class ConfigError(BaerSaxlError):
    """Invalid run configuration (maps to exit status 2)."""


class CacheError(BaerSaxlError):
    """The on-disk action cache is unreadable or belongs to another context."""


class CheckFailure(BaerSaxlError):
    """An asserted check failed (maps to exit status 1)."""

    def __init__(self, tag: str, message: str, data: Optional[dict] = None):
        super().__init__(f"[{tag}] {message}")
        self.tag = tag
        self.data = data or {}
