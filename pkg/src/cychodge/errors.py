"""Exceptions shared across the workbench.

Every failure mode that a caller can reasonably branch on gets its own class;
plain ValueError/TypeError are reserved for malformed arguments.
"""


class WorkbenchError(Exception):
    """Base class for all domain errors raised by this package."""


class SpecMismatch(WorkbenchError):
    """Arithmetic attempted between elements over different ring specs."""


class LogObstruction(WorkbenchError):
    """q-logarithmic integration hit a nonzero q^0 coefficient."""


class NotAUnit(WorkbenchError):
    """Inversion attempted on an element with no invertible leading term."""


class CutoffExceeded(WorkbenchError):
    """A computation needed data beyond the stored arity/length cutoff."""


class MissingEulerData(WorkbenchError):
    """An Euler-graded operation was invoked on a model without grading data."""


class NotNilpotent(WorkbenchError):
    """A gauge cochain fails the declared nilpotency bound."""


class Infeasible(WorkbenchError):
    """A constrained instance generator could not satisfy its constraints."""


class NotBounding(WorkbenchError):
    """A candidate bounding pair fails the weak bounding-pair equation."""


class MissingPerpTable(WorkbenchError):
    """An operation needed a point-constraint table entry that is absent."""


class NotRegularSingular(WorkbenchError):
    """Shearing failed to reach a pole-free connection within the bound."""


class IrrationalEigenvalue(WorkbenchError):
    """A residue endomorphism has a non-rational eigenvalue."""


class ResonanceObstruction(WorkbenchError):
    """An order-by-order gauge solve hit a resonant (singular) linear system."""


class NoLift(WorkbenchError):
    """No filtration-respecting lift with the required image exists."""


class NotANormalFunction(WorkbenchError):
    """A section violates the Griffiths transversality condition."""


class LefschetzFailure(WorkbenchError):
    """The cup-product pairing needed for the bounding cycle is singular."""


class NotFlat(WorkbenchError):
    """A required flat section or flat splitting does not exist."""


class ParseError(WorkbenchError):
    """A model file is malformed."""


class SchemaVersionMismatch(ParseError):
    """A model file declares a schema version this build does not support."""
