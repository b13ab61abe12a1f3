"""File-backed store of per-utterance embedding vectors with cosine distance.

Vectors are keyed by a content hash of the normalized utterance text, so a
string repeated across dialogs is embedded and stored exactly once. Two
encodings share one header line: a human-debuggable text format and a
compact binary format (little-endian float32, length-prefixed keys).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from hashlib import sha256
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyTextError,
    MissingEmbeddingError,
    StoreFormatError,
    ZeroVectorError,
)
from .model import Conversation, Corpus, Utterance, normalize_text

FORMAT_VERSION = "1"
_HEADER_KEYS = ("format_version", "encoding", "dim", "count", "encoder")


def utterance_key(text: str) -> str:
    """Stable content key: sha256 hex digest of the normalized text."""
    normalized = normalize_text(text)
    if not normalized:
        raise EmptyTextError("cannot key empty text")
    return sha256(normalized.encode("utf-8")).hexdigest()


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v), clamped to [0, 2] against float noise.

    Bit-identical vectors short-circuit to exactly 0 rather than leaving
    an ulp of square-root dust behind.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatchError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine distance undefined for zero vector")
    if np.array_equal(u, v):
        return 0.0
    d = 1.0 - float(np.dot(u, v)) / (nu * nv)
    return min(max(d, 0.0), 2.0)


class EmbeddingStore:
    """Immutable-after-construction map from utterance key to vector."""

    def __init__(self, entries: Mapping[str, np.ndarray], encoder: str = "unknown"):
        if not entries:
            raise StoreFormatError("store has no entries")
        self.encoder = encoder
        self._entries: dict[str, np.ndarray] = {}
        dim: int | None = None
        for key, vec in entries.items():
            arr = np.asarray(vec, dtype=np.float32)
            if arr.ndim != 1 or arr.size == 0:
                raise StoreFormatError(f"entry {key!r} is not a flat non-empty vector")
            if not np.all(np.isfinite(arr)):
                raise StoreFormatError(f"entry {key!r} has non-finite values")
            if dim is None:
                dim = int(arr.size)
            elif arr.size != dim:
                raise DimensionMismatchError(
                    f"entry {key!r} has dim {arr.size}, store dim is {dim}"
                )
            arr.setflags(write=False)
            self._entries[key] = arr
        assert dim is not None
        self.dim = dim

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def keys(self) -> Iterable[str]:
        return self._entries.keys()

    def lookup_key(self, key: str, context: str = "") -> np.ndarray:
        try:
            return self._entries[key]
        except KeyError:
            suffix = f" ({context})" if context else ""
            raise MissingEmbeddingError(f"no embedding for key {key}{suffix}") from None

    def lookup(self, utterance: Utterance | str, conversation_id: str | None = None) -> np.ndarray:
        text = utterance.text if isinstance(utterance, Utterance) else utterance
        context = f"text {normalize_text(text)[:40]!r}"
        if conversation_id:
            context += f" in conversation {conversation_id!r}"
        return self.lookup_key(utterance_key(text), context=context)

    def matrix_for(self, conv: Conversation) -> np.ndarray:
        """Stack the conversation's utterance vectors into an (m, dim) array."""
        rows = [self.lookup(u, conversation_id=conv.id) for u in conv.utterances]
        return np.stack(rows).astype(np.float64)

    def coverage(self, corpus: Corpus) -> tuple[int, int, list[tuple[str, int, str]]]:
        """(covered, total, missing) over all utterances of a corpus.

        Missing entries report (conversation id, utterance index, text prefix).
        """
        covered = 0
        total = 0
        missing: list[tuple[str, int, str]] = []
        for conv in corpus:
            for i, utt in enumerate(conv.utterances):
                total += 1
                if utterance_key(utt.text) in self._entries:
                    covered += 1
                else:
                    missing.append((conv.id, i, normalize_text(utt.text)[:40]))
        return covered, total, missing

    # -- persistence ---------------------------------------------------

    def save(self, path: str, encoding: str = "text") -> None:
        if encoding not in ("text", "binary"):
            raise StoreFormatError(f"unknown encoding {encoding!r}")
        header = {
            "format_version": FORMAT_VERSION,
            "encoding": encoding,
            "dim": self.dim,
            "count": len(self._entries),
            "encoder": self.encoder,
        }
        header_line = json.dumps(header, ensure_ascii=False) + "\n"
        if encoding == "text":
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(header_line)
                for key, vec in self._entries.items():
                    values = " ".join(repr(float(x)) for x in vec)
                    fh.write(f"{key} {values}\n")
        else:
            with open(path, "wb") as fh:
                fh.write(header_line.encode("utf-8"))
                for key, vec in self._entries.items():
                    kb = key.encode("utf-8")
                    fh.write(struct.pack("<I", len(kb)))
                    fh.write(kb)
                    fh.write(vec.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str) -> EmbeddingStore:
        """All-or-nothing load of either encoding."""
        with open(path, "rb") as fh:
            raw_header = fh.readline()
            header = _parse_header(raw_header)
            if header["encoding"] == "text":
                entries = _read_text_records(fh, header)
            else:
                entries = _read_binary_records(fh, header)
        store = cls.__new__(cls)
        store.encoder = header["encoder"]
        store.dim = header["dim"]
        store._entries = entries
        return store


def _parse_header(raw: bytes) -> dict:
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StoreFormatError(f"corrupt store header: {exc}") from None
    if not isinstance(header, dict) or any(k not in header for k in _HEADER_KEYS):
        raise StoreFormatError(f"store header missing fields {_HEADER_KEYS}")
    if header["format_version"] != FORMAT_VERSION:
        raise StoreFormatError(f"unsupported format_version {header['format_version']!r}")
    if header["encoding"] not in ("text", "binary"):
        raise StoreFormatError(f"unknown encoding {header['encoding']!r}")
    if not isinstance(header["dim"], int) or header["dim"] <= 0:
        raise StoreFormatError(f"invalid dim {header['dim']!r}")
    if not isinstance(header["count"], int) or header["count"] < 0:
        raise StoreFormatError(f"invalid count {header['count']!r}")
    return header


def _check_record(
    entries: dict[str, np.ndarray], key: str, vec: np.ndarray, dim: int, where: str
) -> None:
    if vec.size != dim:
        raise DimensionMismatchError(
            f"{where}: vector has dim {vec.size}, header says {dim}"
        )
    if not np.all(np.isfinite(vec)):
        raise StoreFormatError(f"{where}: non-finite values")
    if key in entries:
        raise StoreFormatError(f"{where}: duplicate key {key}")
    vec.setflags(write=False)
    entries[key] = vec


def _read_text_records(fh, header: dict) -> dict[str, np.ndarray]:
    entries: dict[str, np.ndarray] = {}
    dim = header["dim"]
    for lineno, raw in enumerate(fh, start=2):
        line = raw.decode("utf-8").rstrip("\n")
        if not line:
            continue
        parts = line.split(" ")
        where = f"line {lineno}"
        if len(parts) < 2:
            raise StoreFormatError(f"{where}: malformed record")
        key = parts[0]
        try:
            vec = np.array([float(p) for p in parts[1:]], dtype=np.float32)
        except ValueError:
            raise StoreFormatError(f"{where}: malformed vector values") from None
        _check_record(entries, key, vec, dim, where)
    if len(entries) != header["count"]:
        raise StoreFormatError(
            f"header count {header['count']} != {len(entries)} records read"
        )
    return entries


def _read_binary_records(fh, header: dict) -> dict[str, np.ndarray]:
    entries: dict[str, np.ndarray] = {}
    dim = header["dim"]
    vec_bytes = 4 * dim
    index = 0
    while True:
        prefix = fh.read(4)
        if not prefix:
            break
        index += 1
        where = f"record {index}"
        if len(prefix) < 4:
            raise StoreFormatError(f"{where}: truncated key length")
        (key_len,) = struct.unpack("<I", prefix)
        if key_len == 0 or key_len > 4096:
            raise StoreFormatError(f"{where}: implausible key length {key_len}")
        kb = fh.read(key_len)
        if len(kb) < key_len:
            raise StoreFormatError(f"{where}: truncated key")
        try:
            key = kb.decode("utf-8")
        except UnicodeDecodeError:
            raise StoreFormatError(f"{where}: key is not valid UTF-8") from None
        vb = fh.read(vec_bytes)
        if len(vb) < vec_bytes:
            raise StoreFormatError(f"{where}: truncated vector")
        vec = np.frombuffer(vb, dtype="<f4").astype(np.float32)
        _check_record(entries, key, vec, dim, where)
    if len(entries) != header["count"]:
        raise StoreFormatError(
            f"header count {header['count']} != {len(entries)} records read"
        )
    return entries
