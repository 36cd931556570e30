"""Exception hierarchy shared by every klbound module."""

from __future__ import annotations


class KLBoundError(ValueError):
    """Base class for validation failures.

    ``field`` names the offending input (e.g. ``"v_p"``) when one can be
    identified, so front ends can point at the right flag.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class SupportMismatchError(KLBoundError):
    """Two distributions do not share a common support."""


class QuadratureError(KLBoundError):
    """Adaptive quadrature failed to meet its tolerance."""


class InapplicableError(KLBoundError):
    """The moment bound's hypotheses fail (e.g. a zero variance)."""


class InputError(KLBoundError):
    """A data source could not be read or parsed."""

    def __init__(self, message: str, row: int | None = None, content: str | None = None):
        super().__init__(message)
        self.row = row
        self.content = content
