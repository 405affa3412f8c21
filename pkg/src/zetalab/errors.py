"""Exception hierarchy shared by every zetalab module."""

from __future__ import annotations


class ZetaLabError(Exception):
    """Base class for all errors raised by zetalab."""


class PoleAtOne(ZetaLabError, ValueError):
    pass


class AccuracyUnreachable(ZetaLabError):
    pass


class BranchObstruction(ZetaLabError):
    """Continuation of log zeta came too close to a zero."""


class ContourThroughZero(ZetaLabError):
    pass


class PoleInRegion(ZetaLabError, ValueError):
    pass


class DegenerateShift(ZetaLabError, ValueError):
    pass


class SigmaOutOfRange(ZetaLabError, ValueError):
    pass


class SetOutsideStrip(ZetaLabError, ValueError):
    pass


class SkippedTau(ZetaLabError):
    pass


class DivisionNearZero(ZetaLabError):
    pass


class MalformedResult(ZetaLabError, ValueError):
    pass


class ConfigError(ZetaLabError, ValueError):
    """Invalid experiment configuration; ``line`` points into the JSON source."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
