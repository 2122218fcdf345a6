"""Exception hierarchy shared across the package."""


class MangamarksError(Exception):
    """Base class for all package errors."""


class SchemaError(MangamarksError):
    """Invalid landmark index, arity, or layout violation."""


class IncompleteGroupError(MangamarksError):
    """An operation required every landmark of a group to be present."""


class FitError(MangamarksError):
    """Degenerate geometry made a transform fit impossible."""


class CompletionError(MangamarksError):
    """Automatic landmark completion prerequisites were not met."""


class ManifestError(MangamarksError):
    """Manifest file could not be parsed."""


class ConfigError(MangamarksError):
    """Invalid pipeline or network configuration."""


class TrainingError(MangamarksError):
    """Training aborted (for example, non-finite loss)."""


class EvaluationError(MangamarksError):
    """Evaluation input violated a metric precondition."""
