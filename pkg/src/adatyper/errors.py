"""Exception types shared across the package."""


class AdaTyperError(Exception):
    """Base class for all package-specific errors."""


class CatalogMismatchError(AdaTyperError):
    """A type name or catalog version does not match the active catalog."""


class ConfigError(AdaTyperError):
    """Invalid or inconsistent configuration."""


class TrainingError(AdaTyperError):
    """Classifier training cannot proceed (e.g. single-class corpus)."""


class RetryableError(AdaTyperError):
    """Transient failure (network); the caller may retry."""


class LoadError(AdaTyperError):
    """A persisted artifact is missing, truncated, or version-mismatched."""


class IngestError(AdaTyperError):
    """Malformed tabular input; carries row/column diagnostics in the message."""


class LeakageError(AdaTyperError):
    """An example column leaked into an evaluation split."""
