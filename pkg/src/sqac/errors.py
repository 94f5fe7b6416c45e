"""Exception types shared across the package."""


class SqacError(Exception):
    """Base class for package-specific errors."""


class IngestError(SqacError):
    """Event-log source is empty, unreadable, or yields no valid events."""


class YearOverlapError(SqacError):
    """Merging volume tables whose year sets intersect would double count."""


class MonthCoverageError(SqacError):
    """A calendar month has zero total traffic; seasonality is undefined.

    Callers should restrict the table to months with traffic before asking
    for seasonality targets.
    """


class ContainerError(SqacError):
    """Artifact file is not a valid container (bad magic, truncated, ...)."""


class ContainerVersionError(ContainerError):
    """Artifact file declares a format version this build cannot read."""


class ContainerChecksumError(ContainerError):
    """Artifact file fails its integrity checksum."""


class CaseSetMismatchError(SqacError):
    """A/B comparison attempted over reports built from different case sets."""
