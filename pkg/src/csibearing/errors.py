"""Exception types shared across the package."""


class CsiBearingError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(CsiBearingError, ValueError):
    """An argument violates an operation's precondition."""


class MalformedLogError(CsiBearingError, ValueError):
    """An exchange log breaks its ordering/uniqueness contract."""


class DegenerateChannelError(CsiBearingError, ValueError):
    """A packet pair carries a zero-magnitude channel value."""


class ResourceLimitError(CsiBearingError, RuntimeError):
    """A computation would exceed the configured memory budget."""


class DegenerateProfileError(CsiBearingError, ValueError):
    """A profile has no mass (or no angular spread) to summarize."""


class SingularGeometryError(CsiBearingError, ValueError):
    """Source and receiver positions coincide (or nearly so)."""


class InsufficientObservationsError(CsiBearingError, ValueError):
    """Fewer than two bearing observations survive outlier rejection."""


class DegenerateGeometryError(CsiBearingError, ValueError):
    """Surviving bearing rays are too close to parallel to intersect."""


class RecordParseError(CsiBearingError, ValueError):
    """A record/scene/bearing file is syntactically or structurally invalid."""


class RecordValidationError(CsiBearingError, ValueError):
    """A parsed record violates a semantic requirement."""
