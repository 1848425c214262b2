"""Exception types shared across the package.

Every error raised deliberately by this package derives from OutracError and
carries a stable machine-readable ``kind`` string, so the CLI can map failures
to structured JSON without matching on exception class names.
"""

from __future__ import annotations


class OutracError(Exception):
    """Base class for all package errors."""

    kind = "error"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = dict(details)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


class ParseError(OutracError):
    """Malformed input: bad JSON shape, bad rational literal, bad field."""

    kind = "parse-error"


class InvariantViolation(OutracError):
    """An internal consistency check failed."""

    kind = "invariant-violation"


class NotBiconnected(OutracError):
    kind = "not-biconnected"


class NotSeriesParallel(OutracError):
    kind = "not-series-parallel"


class DegreeExceeded(OutracError):
    """Input graph has a vertex of higher degree than the algorithm admits."""

    kind = "degree-exceeded"


class OverlappingEdges(OutracError):
    """Two drawn edges share more than finitely many points."""

    kind = "overlapping-edges"


class ImproperIncidence(OutracError):
    """An edge passes through a vertex or a crossing point it is not part of."""

    kind = "improper-incidence"


class NotRac(OutracError):
    """The drawing has a crossing that is not at a right angle."""

    kind = "not-rac"


class MalformedRotation(OutracError):
    """A rotation system does not match the graph it claims to describe."""

    kind = "malformed-rotation"


class OutlineError(OutracError):
    """Outer boundary extraction failed a self-check; indicates a bug upstream."""

    kind = "outline-error"


class InfeasibleParameters(OutracError):
    """Generator parameters outside the supported range."""

    kind = "infeasible-parameters"


class DrawingConstructionError(OutracError):
    """A drawing algorithm could not complete despite admissible input."""

    kind = "drawing-construction-error"
