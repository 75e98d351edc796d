"""Exception types raised across the package."""

from __future__ import annotations


class ParkspaceError(Exception):
    """Base class for all package errors."""


class DegenerateInput(ParkspaceError, ValueError):
    """Point set has fewer than 3 points or is collinear."""


class GridMismatch(ParkspaceError, ValueError):
    pass


class EmptyDay(ParkspaceError, ValueError):
    """No frames (or no counts) to derive detections or a heat map from."""


class ZeroGroundTruth(ParkspaceError, ValueError):
    pass


class EmptyRaster(ParkspaceError, ValueError):
    """No pixel center falls inside the rasterized shape."""


class ConfigError(ParkspaceError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ParseError(ParkspaceError, ValueError):
    """Malformed input file. ``line`` is 1-based, or None for whole-file JSON."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
