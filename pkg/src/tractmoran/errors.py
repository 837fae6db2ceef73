"""Exception hierarchy shared across the package."""


class TractMoranError(Exception):
    """Base class for all errors raised by this package."""


class InvalidCoordinateError(TractMoranError):
    """Longitude/latitude outside valid ranges, or points too far apart to project."""


class InvalidGeometryError(TractMoranError):
    """Degenerate or otherwise unusable polygon geometry."""


class InvalidTractSetError(TractMoranError):
    """Tract collection violates its invariants (e.g. duplicate ids)."""


class SchemaError(TractMoranError):
    """Input file is missing required columns or is structurally unreadable."""


class ParseError(TractMoranError):
    """Row-level parse failure escalated under strict parsing."""


class EmptyInputError(TractMoranError):
    """Operation requires a nonempty input."""


class AlignmentError(TractMoranError):
    """Variable vectors or tract lists do not share the same id order."""


class ConstantFieldError(TractMoranError):
    """Variable has zero variance where nonzero variance is required."""


class InsufficientObservationsError(TractMoranError):
    """Too few observations for the requested statistic or structure."""


class DegenerateWeightsError(TractMoranError):
    """Weights structure unusable (e.g. every observation is an island)."""


class InvalidWeightsError(TractMoranError):
    """Weights do not satisfy a required property (row standardization, no islands)."""


class InvalidIntensityError(TractMoranError):
    """Negative intensity passed to a point generator."""


class ConfigError(TractMoranError):
    """Run configuration violates its invariants."""
