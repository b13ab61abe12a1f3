"""Minimal reader for the canonical corpus format.

Only what extraction needs: conversation ids and utterance texts, in
order. One JSON object per line with ``id`` and ``utterances[].text``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class UtteranceRef:
    """Where a text came from, for error messages and the skip report."""

    conversation_id: str
    index: int
    text: str


def iter_utterances(path: str) -> Iterator[UtteranceRef]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict) or "id" not in rec:
                raise CorpusError(f"{path}:{lineno}: record has no 'id'")
            utts = rec.get("utterances")
            if not isinstance(utts, list) or not utts:
                raise CorpusError(f"{path}:{lineno}: record has no utterances")
            for i, utt in enumerate(utts):
                if not isinstance(utt, dict) or not isinstance(utt.get("text"), str):
                    raise CorpusError(
                        f"{path}:{lineno}: utterance {i} has no text field"
                    )
                yield UtteranceRef(str(rec["id"]), i, utt["text"])
