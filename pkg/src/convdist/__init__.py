"""Conversation similarity toolkit.

Core pieces: a weighted edit distance with alignment backtrace
(:mod:`convdist.editops`), the semantic conversation measure with actor
constraints (:mod:`convdist.conved`), the structural reference metric
(:mod:`convdist.structed`), document-level baselines
(:mod:`convdist.baselines`), and the bootstrap-correlation evaluation
harness (:mod:`convdist.evaluate`, :mod:`convdist.triplets`).
"""

from .conved import ALPHA_PRESETS, ConvEDConfig, conv_ed, substitution_cost
from .editops import (
    DELETE,
    FORBIDDEN,
    INSERT,
    SUBSTITUTE,
    AlignmentResult,
    CostModel,
    EditStep,
    edit_distance,
    format_alignment,
    replay,
)
from .errors import ConvDistError
from .model import (
    ActAnnotation,
    Conversation,
    Corpus,
    Utterance,
    load_corpus,
    normalize_text,
    parse_corpus,
    save_corpus,
    serialize_corpus,
    validate,
)
from .baselines import DocVectorStore, avg_sem_dist, d2v_dist
from .store import EmbeddingStore, cosine_distance, utterance_key
from .structed import ActionFlow, action_flow, struct_ed

__version__ = "0.1.0"

__all__ = [
    "ALPHA_PRESETS",
    "ActAnnotation",
    "ActionFlow",
    "AlignmentResult",
    "ConvDistError",
    "ConvEDConfig",
    "Conversation",
    "Corpus",
    "CostModel",
    "DELETE",
    "DocVectorStore",
    "EditStep",
    "EmbeddingStore",
    "FORBIDDEN",
    "INSERT",
    "SUBSTITUTE",
    "Utterance",
    "action_flow",
    "avg_sem_dist",
    "conv_ed",
    "cosine_distance",
    "d2v_dist",
    "edit_distance",
    "format_alignment",
    "load_corpus",
    "normalize_text",
    "parse_corpus",
    "replay",
    "save_corpus",
    "serialize_corpus",
    "struct_ed",
    "substitution_cost",
    "utterance_key",
    "validate",
]
