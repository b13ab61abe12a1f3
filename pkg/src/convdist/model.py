"""Canonical conversation data model, corpus ingestion, and validation.

The canonical corpus file is UTF-8 JSON-lines: one conversation object per
line with fields ``{id, metadata?, utterances: [{speaker, text, acts?}]}``.
Objects are immutable after construction; semantic invariants are checked by
:func:`validate`, structural ones at parse time.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from .errors import CorpusFormatError

_WS_RUN = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Normalize text for downstream keying.

    Unicode NFC, trim, and collapse internal whitespace runs to single
    spaces. Case is preserved; the original text is never modified in the
    data model itself.
    """
    return _WS_RUN.sub(" ", unicodedata.normalize("NFC", text).strip())


@dataclass(frozen=True)
class ActAnnotation:
    """A dialog-act label with an optional slot argument."""

    act: str
    slot: str | None = None

    def to_dict(self) -> dict[str, str]:
        d = {"act": self.act}
        if self.slot is not None:
            d["slot"] = self.slot
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ActAnnotation:
        return cls(act=d["act"], slot=d.get("slot"))


@dataclass(frozen=True)
class Utterance:
    """One speaker turn: actor label, verbatim text, optional act annotations."""

    speaker: str
    text: str
    acts: tuple[ActAnnotation, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"speaker": self.speaker, "text": self.text}
        if self.acts:
            d["acts"] = [a.to_dict() for a in self.acts]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Utterance:
        acts = tuple(ActAnnotation.from_dict(a) for a in d.get("acts", ()))
        return cls(speaker=d["speaker"], text=d["text"], acts=acts)


@dataclass(frozen=True)
class Conversation:
    """An ordered, non-empty sequence of utterances with a unique id."""

    id: str
    utterances: tuple[Utterance, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.utterances)

    def speakers(self) -> list[str]:
        return [u.speaker for u in self.utterances]

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"id": self.id}
        if self.metadata:
            d["metadata"] = {k: self.metadata[k] for k in sorted(self.metadata)}
        d["utterances"] = [u.to_dict() for u in self.utterances]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Conversation:
        utts = tuple(Utterance.from_dict(u) for u in d["utterances"])
        return cls(id=d["id"], utterances=utts, metadata=dict(d.get("metadata", {})))


@dataclass(frozen=True)
class Corpus:
    """A list of conversations with distinct ids."""

    conversations: tuple[Conversation, ...]
    format_version: str = "1"

    def __len__(self) -> int:
        return len(self.conversations)

    def __iter__(self) -> Iterator[Conversation]:
        return iter(self.conversations)

    def ids(self) -> list[str]:
        return [c.id for c in self.conversations]

    def get(self, conv_id: str) -> Conversation:
        try:
            return self._by_id()[conv_id]
        except KeyError:
            raise KeyError(f"no conversation with id {conv_id!r}") from None

    def _by_id(self) -> dict[str, Conversation]:
        # lazily built; object is frozen so caching via __dict__ is safe
        cache = self.__dict__.get("_index")
        if cache is None:
            cache = {c.id: c for c in self.conversations}
            object.__setattr__(self, "_index", cache)
        return cache


@dataclass(frozen=True)
class ParseError:
    """A positioned record-level failure from :func:`parse_corpus`."""

    line: int
    reason: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.reason}"


@dataclass
class ParseResult:
    corpus: Corpus
    errors: list[ParseError]

    def raise_on_errors(self) -> Corpus:
        if self.errors:
            first = self.errors[0]
            raise CorpusFormatError(
                f"{first.reason} ({len(self.errors)} record error(s) total)",
                line=first.line,
            )
        return self.corpus


def _record_to_conversation(rec: Any) -> Conversation:
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    if "id" not in rec or not isinstance(rec["id"], str) or not rec["id"]:
        raise ValueError("missing or empty 'id'")
    utts = rec.get("utterances")
    if not isinstance(utts, list):
        raise ValueError("missing 'utterances' list")
    if not utts:
        raise ValueError("empty utterance list")
    metadata = rec.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise ValueError("'metadata' must map strings to strings")
    parsed: list[Utterance] = []
    for i, u in enumerate(utts):
        if not isinstance(u, dict):
            raise ValueError(f"utterance {i} is not an object")
        if not isinstance(u.get("speaker"), str):
            raise ValueError(f"utterance {i}: missing 'speaker'")
        if not isinstance(u.get("text"), str):
            raise ValueError(f"utterance {i}: missing 'text'")
        acts_raw = u.get("acts", [])
        if not isinstance(acts_raw, list):
            raise ValueError(f"utterance {i}: 'acts' must be a list")
        acts = []
        for j, a in enumerate(acts_raw):
            if not isinstance(a, dict) or not isinstance(a.get("act"), str):
                raise ValueError(f"utterance {i}: act {j} missing 'act' label")
            slot = a.get("slot")
            if slot is not None and not isinstance(slot, str):
                raise ValueError(f"utterance {i}: act {j} has non-string slot")
            acts.append(ActAnnotation(act=a["act"], slot=slot))
        parsed.append(Utterance(speaker=u["speaker"], text=u["text"], acts=tuple(acts)))
    return Conversation(id=rec["id"], utterances=tuple(parsed), metadata=dict(metadata))


def parse_corpus(source: Iterable[str]) -> ParseResult:
    """Parse a line-delimited record stream into a corpus.

    Every input record either yields a conversation or a positioned error;
    nothing is silently dropped. Insertion order is preserved. Blank lines
    are ignored (they are not records).
    """
    conversations: list[Conversation] = []
    errors: list[ParseError] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(ParseError(lineno, f"invalid JSON: {exc.msg}"))
            continue
        try:
            conv = _record_to_conversation(rec)
        except ValueError as exc:
            errors.append(ParseError(lineno, str(exc)))
            continue
        if conv.id in seen_ids:
            errors.append(ParseError(lineno, f"duplicate id {conv.id!r}"))
            continue
        seen_ids.add(conv.id)
        conversations.append(conv)
    return ParseResult(Corpus(tuple(conversations)), errors)


def load_corpus(path: str) -> Corpus:
    """Load and strictly parse a canonical corpus file."""
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh).raise_on_errors()


def serialize_corpus(corpus: Corpus) -> str:
    """Serialize to the canonical line-delimited format.

    Keys are emitted in a fixed order (id, metadata, utterances) with
    metadata keys sorted, so serialize∘parse∘serialize is byte-stable.
    """
    return "".join(
        json.dumps(conv.to_dict(), ensure_ascii=False) + "\n" for conv in corpus
    )


def save_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_corpus(corpus))


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate`."""

    conversation_id: str
    utterance_index: int | None
    message: str

    def __str__(self) -> str:
        where = self.conversation_id
        if self.utterance_index is not None:
            where += f"[{self.utterance_index}]"
        return f"{where}: {self.message}"


def validate(corpus: Corpus) -> list[Violation]:
    """Check semantic invariants; violations are data, not failures."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for conv in corpus:
        if conv.id in seen:
            violations.append(Violation(conv.id, None, "duplicate conversation id"))
        seen.add(conv.id)
        if not conv.utterances:
            violations.append(Violation(conv.id, None, "conversation has no utterances"))

        for i, utt in enumerate(conv.utterances):
            if not utt.speaker:
                violations.append(Violation(conv.id, i, "empty speaker label"))
            if not normalize_text(utt.text):
                violations.append(Violation(conv.id, i, "text empty after trimming"))
            for ann in utt.acts:
                act_norm = normalize_text(ann.act)
                if not act_norm:
                    violations.append(Violation(conv.id, i, "empty act label"))
                elif " " in act_norm:
                    violations.append(
                        Violation(conv.id, i, f"act label contains whitespace: {ann.act!r}")
                    )
                if ann.slot is not None and not ann.slot:
                    violations.append(Violation(conv.id, i, "empty slot label"))
    return violations
