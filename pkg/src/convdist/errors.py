"""Exception hierarchy shared across the toolkit."""


class ConvDistError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(ConvDistError):
    """A corpus file or record does not conform to the canonical format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StoreFormatError(ConvDistError):
    """An embedding-store file is malformed or internally inconsistent."""


class MissingEmbeddingError(ConvDistError):
    """An utterance or document key is absent from the store."""


class DimensionMismatchError(ConvDistError):
    """Vector dimensions disagree within a store or between operands."""


class ZeroVectorError(ConvDistError):
    """Cosine distance is undefined for an all-zero vector."""


class EmptyTextError(ConvDistError):
    """Text is empty after normalization and cannot be keyed."""


class CostModelError(ConvDistError):
    """A cost function returned a negative, NaN, or infinite value."""


class UnannotatedUtteranceError(ConvDistError):
    """An utterance lacks the act annotations a flow-based measure needs."""


class MeasureError(ConvDistError):
    """A similarity measure's precondition failed for a conversation pair."""


class CorrelationUndefinedError(ConvDistError):
    """Pearson correlation is undefined (constant input or too few points)."""


class ConfigError(ConvDistError):
    """Invalid parameter combination or configuration value."""
