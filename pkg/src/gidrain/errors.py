"""Exception taxonomy shared by all gidrain modules."""


class GidrainError(Exception):
    """Base class for all errors raised by this package."""


class NotEnoughData(GidrainError):
    """Input series or vector is too short for the requested operation."""


class NoData(GidrainError):
    """Operation received an empty input where at least one item is required."""


class NonUniformSampling(GidrainError):
    """Sample timestamps are not uniformly spaced."""


class NonDecaying(GidrainError):
    """Segment does not exhibit a decaying water level (slope >= 0 or constant)."""


class InvalidTarget(GidrainError):
    """Drain-time target level is outside the valid (0, h0] range."""


class ShapeError(GidrainError):
    """Paired vectors have mismatched lengths."""


class SchemaError(GidrainError):
    """Input file or payload does not conform to its documented schema."""


class InvalidGeometry(GidrainError):
    """Site geometry is physically impossible (e.g. non-positive surface area)."""


class InvalidSeries(GidrainError):
    """Time series violates a structural precondition (e.g. unsorted timestamps)."""


class IndeterminateDrift(GidrainError):
    """Series does not contain enough dry periods to estimate sensor drift."""


class InvalidManifest(GidrainError):
    """Synthetic-truth manifest entry fails validation."""


class NotFound(GidrainError):
    """Requested site or resource is not registered."""


class BadRequest(GidrainError):
    """Ingestion payload is malformed."""


class InvalidRange(GidrainError):
    """Query range has start after end."""


class ConfigError(GidrainError):
    """Run configuration is missing, inconsistent, or points at absent inputs."""


class StageError(GidrainError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
