"""Extraction pipeline: corpus in, embedding-store file plus sidecar out.

Unique normalized utterances are collected first (cache semantics live
here: a text repeated across dialogs is encoded once), then encoded in
batches, then written in first-seen order. Utterances that are empty after
normalization are skipped with a warning and listed in the sidecar report
next to the output file.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .corpus import UtteranceRef, iter_utterances
from .encoders import EncoderError, resolve_encoder
from .keys import normalize_text, utterance_key
from .storefile import write_store


@dataclass(frozen=True)
class ExtractorConfig:
    corpus: str
    output: str
    encoder: str = "mock"
    batch_size: int = 64
    encoding: str = "text"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.encoding not in ("text", "binary"):
            raise ValueError(f"unknown output encoding {self.encoding!r}")


@dataclass
class ExtractReport:
    encoder: str
    dim: int
    total_utterances: int = 0
    unique_keys: int = 0
    skipped: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "encoder": self.encoder,
            "dim": self.dim,
            "total_utterances": self.total_utterances,
            "unique_keys": self.unique_keys,
            "skipped": self.skipped,
        }


def sidecar_path(output: str) -> str:
    return output + ".report.json"


def extract(cfg: ExtractorConfig) -> ExtractReport:
    encoder = resolve_encoder(cfg.encoder)

    ordered_keys: list[str] = []
    texts_by_key: dict[str, str] = {}
    first_seen: dict[str, UtteranceRef] = {}
    skipped: list[dict] = []
    total = 0
    for ref in iter_utterances(cfg.corpus):
        total += 1
        if not normalize_text(ref.text):
            skipped.append(
                {
                    "conversation": ref.conversation_id,
                    "utterance": ref.index,
                    "reason": "empty after normalization",
                }
            )
            print(
                f"convembed: warning: skipping empty utterance "
                f"{ref.conversation_id}[{ref.index}]",
                file=sys.stderr,
            )
            continue
        key = utterance_key(ref.text)
        if key not in texts_by_key:
            ordered_keys.append(key)
            texts_by_key[key] = ref.text
            first_seen[key] = ref

    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    for start in range(0, len(ordered_keys), cfg.batch_size):
        batch_keys = ordered_keys[start : start + cfg.batch_size]
        batch_texts = [texts_by_key[k] for k in batch_keys]
        try:
            matrix = np.asarray(encoder.encode(batch_texts))
        except EncoderError:
            raise
        except Exception as exc:
            where = ", ".join(
                f"{first_seen[k].conversation_id}[{first_seen[k].index}]"
                for k in batch_keys[:5]
            )
            raise EncoderError(
                f"encoder failed on batch starting at utterance {where}: {exc}"
            ) from exc
        if matrix.ndim != 2 or matrix.shape[0] != len(batch_keys):
            raise EncoderError(
                f"encoder returned shape {matrix.shape} for a batch of {len(batch_keys)}"
            )
        if dim is None:
            dim = int(matrix.shape[1])
        elif matrix.shape[1] != dim:
            raise EncoderError(
                f"encoder changed dimension mid-run: {matrix.shape[1]} != {dim}"
            )
        for key, row in zip(batch_keys, matrix):
            entries[key] = row

    if not entries:
        raise EncoderError("no encodable utterances in the corpus")
    assert dim is not None
    write_store(cfg.output, entries, dim=dim, encoder=encoder.name, encoding=cfg.encoding)

    report = ExtractReport(
        encoder=encoder.name,
        dim=dim,
        total_utterances=total,
        unique_keys=len(entries),
        skipped=skipped,
    )
    with open(sidecar_path(cfg.output), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return report
