"""Exception types raised on invalid inputs.

Everything here derives from ValidationError (itself a ValueError), so the
CLI can map "your input was bad" to exit code 2 while genuine bugs still
surface as ordinary tracebacks (exit code 1).
"""


class ValidationError(ValueError):
    """Base class for input-validation failures."""


class InvalidComplexError(ValidationError):
    """Cell list is structurally malformed (duplicate ids, gaps, bad dims)."""


class DanglingFaceError(ValidationError):
    """A cell's boundary references an id that does not exist."""


class DimensionMismatchError(ValidationError):
    """Face dimensions are inconsistent with the cell that lists them."""


class MissingVertexValueError(ValidationError):
    """A vertex of the complex has no value in the supplied assignment."""


class NotVertexBasedError(ValidationError):
    """Operation requires a filtration derived from vertex values."""


class AsymmetricMatrixError(ValidationError):
    """Distance matrix is not symmetric."""


class NegativeDistanceError(ValidationError):
    """Distance matrix contains negative entries."""


class EmptyGridError(ValidationError):
    """Image grid has no pixels."""


class ComplexMismatchError(ValidationError):
    """Two objects that must live on the same complex do not."""


class NonMonotoneFunctionError(ValidationError):
    """Cell values decrease along a face relation."""


class EmptySequenceError(ValidationError):
    """A sequence argument needs at least two entries."""


class UnknownColumnError(ValidationError):
    """Named column is absent from the dataset."""


class DomainMismatchError(ValidationError):
    """Inputs to a pairwise computation live on incomparable domains."""
