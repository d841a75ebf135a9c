"""Domain error types.

Every failure mode that callers are expected to handle has a named
exception here.  The CLI prints the class name on exit code 1 and the
HTTP service echoes it in 422 response bodies, so the names are part of
the public contract.
"""


class RoomFemError(Exception):
    """Base class for all domain errors raised by this package."""


# --- geometry ---------------------------------------------------------------

class EmptyScan(RoomFemError):
    """The surface scan contains no triangles."""


class NoPlanesFound(RoomFemError):
    """No plane meeting the area threshold could be extracted."""


class MissingFloor(RoomFemError):
    """No upward-facing horizontal plane was found."""


class MissingCeiling(RoomFemError):
    """No downward-facing horizontal plane above the floor was found."""


class TooFewWalls(RoomFemError):
    """Fewer than three near-vertical planes were found."""


class UnboundedFootprint(RoomFemError):
    """The wall half-planes do not enclose a bounded region."""


class EmptyFootprint(RoomFemError):
    """The wall half-planes have an empty intersection."""


# --- meshgen ----------------------------------------------------------------

class DegeneratePolygon(RoomFemError):
    """Footprint polygon has repeated vertices, zero area, or is not CCW."""


class NotSimple(RoomFemError):
    """Footprint polygon edges intersect each other."""


# --- fem --------------------------------------------------------------------

class DegenerateTet(RoomFemError):
    """Tetrahedron volume is not positive (below tolerance)."""


class PointOutsideDomain(RoomFemError):
    """A query point lies in no tetrahedron of the mesh."""


class NoDirichletData(RoomFemError):
    """A solve was requested without any Dirichlet boundary data."""


class UnknownBoundaryTag(RoomFemError):
    """A boundary condition references a tag the mesh does not carry."""


class SolverDiverged(RoomFemError):
    """The linear solver failed to reach the requested tolerance."""


# --- solver -----------------------------------------------------------------

class DimensionMismatch(RoomFemError):
    """Operand shapes are incompatible with the matrix dimensions."""


class NonpositiveDiagonal(RoomFemError):
    """A preconditioner needs a strictly positive diagonal entry that is missing."""


class NaNDetected(RoomFemError):
    """A non-finite value appeared during an iterative solve."""


# --- io ---------------------------------------------------------------------

class ParseError(RoomFemError):
    """Input document is malformed; the message names the offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormat(RoomFemError):
    """The requested format is not one this package reads or writes."""


class LengthMismatch(RoomFemError):
    """A nodal field does not match the mesh vertex count."""


# --- service ----------------------------------------------------------------

class StageConflict(RoomFemError):
    """An operation was requested out of order for the session's stage."""
