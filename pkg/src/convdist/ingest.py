"""Adapters from native dataset schemas to the canonical corpus format.

Speaker labels and annotation labels are carried over verbatim; mapping
them onto roles is a downstream configuration concern, not an ingestion
one. Each adapter returns conversations in source order.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import CorpusFormatError
from .model import ActAnnotation, Conversation, Corpus, Utterance


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise CorpusFormatError(message)


def ingest_sgd(directory: str) -> Corpus:
    """Read a directory of schema-guided dialog files (``dialogues_*.json``).

    Per-turn annotations are collected across all frames in order; actions
    with an empty slot yield a slot-free annotation.
    """
    root = Path(directory)
    _require(root.is_dir(), f"{directory!r} is not a directory")
    files = sorted(p for p in root.glob("dialogues_*.json"))
    _require(bool(files), f"no dialogues_*.json files under {directory!r}")
    conversations: list[Conversation] = []
    for path in files:
        try:
            dialogs = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"{path.name}: invalid JSON: {exc.msg}") from None
        _require(isinstance(dialogs, list), f"{path.name}: expected a list of dialogs")
        for d in dialogs:
            where = f"{path.name}:{d.get('dialogue_id', '?')}"
            _require(isinstance(d, dict) and "dialogue_id" in d, f"{where}: missing dialogue_id")
            turns = d.get("turns")
            _require(isinstance(turns, list) and turns, f"{where}: missing turns")
            utterances = []
            for t in turns:
                _require(
                    isinstance(t, dict) and isinstance(t.get("speaker"), str)
                    and isinstance(t.get("utterance"), str),
                    f"{where}: turn missing speaker/utterance",
                )
                acts = []
                for frame in t.get("frames", []):
                    for action in frame.get("actions", []):
                        act = action.get("act")
                        _require(isinstance(act, str) and bool(act), f"{where}: action missing act")
                        slot = action.get("slot") or None
                        acts.append(ActAnnotation(act=act, slot=slot))
                utterances.append(
                    Utterance(speaker=t["speaker"], text=t["utterance"], acts=tuple(acts))
                )
            metadata = {"source": "sgd", "file": path.name}
            services = d.get("services")
            if isinstance(services, list) and services:
                metadata["services"] = ",".join(str(s) for s in services)
            conversations.append(
                Conversation(id=str(d["dialogue_id"]), utterances=tuple(utterances), metadata=metadata)
            )
    return Corpus(tuple(conversations))


def ingest_msdialog(path: str) -> Corpus:
    """Read an MSDialog-style JSON file: one object keyed by dialog id.

    The space-separated intent tags of an utterance are its acts -- one
    slot-free annotation per tag, in source order (multi-label utterances
    keep every label).
    """
    p = Path(path)
    _require(p.is_file(), f"{path!r} is not a file")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{p.name}: invalid JSON: {exc.msg}") from None
    _require(isinstance(data, dict), f"{p.name}: expected an object keyed by dialog id")
    conversations: list[Conversation] = []
    for conv_id, d in data.items():
        where = f"{p.name}:{conv_id}"
        _require(isinstance(d, dict), f"{where}: dialog is not an object")
        utts = d.get("utterances")
        _require(isinstance(utts, list) and utts, f"{where}: missing utterances")
        utterances = []
        for u in utts:
            _require(
                isinstance(u, dict) and isinstance(u.get("utterance"), str)
                and isinstance(u.get("actor_type"), str),
                f"{where}: utterance missing actor_type/utterance",
            )
            tags = u.get("tags", "")
            _require(isinstance(tags, str), f"{where}: tags must be a string")
            acts = tuple(ActAnnotation(act=tag) for tag in tags.split() if tag)
            utterances.append(
                Utterance(speaker=u["actor_type"], text=u["utterance"], acts=acts)
            )
        metadata = {"source": "msdialog"}
        for key in ("title", "category"):
            if isinstance(d.get(key), str) and d[key]:
                metadata[key] = d[key]
        conversations.append(
            Conversation(id=str(conv_id), utterances=tuple(utterances), metadata=metadata)
        )
    return Corpus(tuple(conversations))
