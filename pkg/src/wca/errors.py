"""Exception types shared across the engine.

The CLI maps these onto exit codes: domain and configuration problems
exit 1, file format and I/O problems exit 2.
"""


class WcaError(Exception):
    """Base class for all engine errors."""


class DomainError(WcaError):
    """An input violates a mathematical precondition (zero vector, empty set, NaN)."""


class DimensionError(WcaError):
    """Operands have incompatible dimensions."""


class ConfigError(WcaError):
    """An invalid or inconsistent run configuration."""


class BoundsError(WcaError):
    """A crop or region does not fit inside its image."""


class FormatError(WcaError):
    """A malformed embedding file. Carries the byte offset of the defect."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class MissingEmbeddingError(WcaError):
    """A requested id is not present in the embedding store."""

    def __init__(self, entry_id: str):
        super().__init__(f"no embedding stored for id {entry_id!r}")
        self.entry_id = entry_id


class IngestionError(WcaError):
    """A description file or manifest is malformed."""


class CacheInvalidError(WcaError):
    """A cache file is unusable with the current backend or configuration."""


class ConstructionError(WcaError):
    """Synthetic instance construction exhausted its resample budget."""


class ExplanationUnavailableError(WcaError):
    """Explanation rows were requested from a fast-path-only run."""
