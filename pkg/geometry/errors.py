"""
Exceptions raised by the geometry, tree and harness packages
"""
from typing import Iterable, List, Optional


class GeometryError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(GeometryError, ValueError):
    """An argument lies outside the domain of an operation"""


class InvariantViolation(GeometryError):
    """A structure failed one or more of its invariants"""

    def __init__(self, message: str, failures: Optional[Iterable[str]] = None):
        self.failures: List[str] = list(failures or [])
        if self.failures:
            message = message + ": " + "; ".join(self.failures)
        super().__init__(message)


class PreconditionError(GeometryError):
    """A documented precondition does not hold; `offenders` lists the culprits"""

    def __init__(self, message: str, offenders: Optional[Iterable] = None):
        self.offenders = list(offenders or [])
        super().__init__(message)


class ParseError(GeometryError, ValueError):
    """Malformed input file, with the JSON location of the problem"""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)
