"""Offline utterance-embedding extractor for the convdist toolkit."""

from .encoders import EncoderError, MockEncoder, resolve_encoder
from .extract import ExtractorConfig, ExtractReport, extract
from .keys import normalize_text, utterance_key

__version__ = "0.1.0"

__all__ = [
    "EncoderError",
    "ExtractReport",
    "ExtractorConfig",
    "MockEncoder",
    "extract",
    "normalize_text",
    "resolve_encoder",
    "utterance_key",
]
