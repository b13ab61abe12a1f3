"""Utterance keying contract shared with the consumer toolkit.

The consumer looks vectors up by sha256 hex digest of the normalized text
(Unicode NFC, trimmed, internal whitespace runs collapsed to single
spaces, case preserved). This module must produce byte-identical keys; the
golden-digest fixture in the test suite pins the contract on both sides.
"""

from __future__ import annotations

import re
import unicodedata
from hashlib import sha256

_WS_RUN = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    return _WS_RUN.sub(" ", unicodedata.normalize("NFC", text).strip())


def utterance_key(text: str) -> str:
    """Key for a non-empty utterance; raises ValueError on empty-after-trim."""
    normalized = normalize_text(text)
    if not normalized:
        raise ValueError("cannot key empty text")
    return sha256(normalized.encode("utf-8")).hexdigest()
