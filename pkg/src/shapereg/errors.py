"""Exception hierarchy shared by all shapereg modules.

Two branches matter for the command line front end: ``InputError`` covers
malformed or inconsistent inputs (exit code 2), ``ComputationError`` covers
failures that arise while the numbers are being crunched (exit code 3).
"""

from __future__ import annotations


class ShapeRegError(Exception):
    """Base class for every error raised by this package."""


class InputError(ShapeRegError):
    """Invalid or inconsistent input (bad file, bad argument, bad shape)."""


class ComputationError(ShapeRegError):
    """A computation could not be completed on otherwise well-formed input."""


class ParseError(InputError):
    """A contour file could not be parsed.  Carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedRow(ParseError):
    """A contour file row does not have exactly two fields."""


class LengthMismatch(InputError):
    """Two sequences that must have equal length do not."""


class EmptySet(InputError):
    """An operation that needs at least one element received none."""


class IndexOutOfRange(InputError):
    """A correspondence path refers to indices outside a contour."""


class BandTooNarrow(InputError):
    """A warping band narrower than the length difference of the inputs."""


class ConfigInfeasible(InputError):
    """A synthetic-data configuration cannot be realised."""


class DegenerateContour(ComputationError):
    """A contour collapsed to a single point and cannot be normalised."""


class SingularSystem(ComputationError):
    """The pose least-squares system is rank deficient."""


class InsufficientSupport(ComputationError):
    """Too few samples cover an index to estimate the requested statistic."""


class OrderRecoveryFailed(ComputationError):
    """Point ordering could not be recovered from an unordered set."""


class ZeroArea(ComputationError):
    """A contour rasterised to an empty region."""
