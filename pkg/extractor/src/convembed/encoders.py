"""Sentence encoders, pluggable by name.

``mock`` (optionally ``mock:<dim>``) is a deterministic hash-projection
encoder for CI and offline runs: each lowercased word token is hashed to a
fixed pseudo-random direction and the utterance vector is the normalized
sum, so texts sharing words land near each other and no model download is
ever needed. ``sbert:<model>`` loads a sentence-transformers model on
first use.
"""

from __future__ import annotations

import math
from hashlib import sha256
from typing import Protocol, Sequence

import numpy as np

from .keys import normalize_text


class EncoderError(Exception):
    pass


class Encoder(Protocol):
    name: str
    dim: int

    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


_TOKEN_CACHE_LIMIT = 65536


class MockEncoder:
    """Deterministic bag-of-hashed-words projection, unit-normalized."""

    def __init__(self, dim: int = 64):
        if dim < 8:
            raise EncoderError("mock encoder dim must be at least 8")
        self.dim = dim
        self.name = f"mock-{dim}"
        self._token_vectors: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_vectors.get(token)
        if vec is not None:
            return vec
        raw = token.encode("utf-8")
        chunks = []
        for counter in range(math.ceil(self.dim / 8)):
            digest = sha256(raw + b"\x00" + counter.to_bytes(4, "little")).digest()
            chunks.append(np.frombuffer(digest, dtype="<u4"))
        words = np.concatenate(chunks)[: self.dim]
        # uniform in [-1, 1): distinct tokens are near-orthogonal directions
        vec = (words.astype(np.float64) / 2**31) - 1.0
        vec /= np.linalg.norm(vec)
        if len(self._token_vectors) < _TOKEN_CACHE_LIMIT:
            self._token_vectors[token] = vec
        return vec

    @staticmethod
    def _tokens(text: str) -> list[str]:
        cleaned = [
            t for t in "".join(
                c if c.isalnum() else " " for c in normalize_text(text).lower()
            ).split()
        ]
        return cleaned if cleaned else [normalize_text(text).lower()]

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for row, text in enumerate(texts):
            acc = np.zeros(self.dim)
            for token in self._tokens(text):
                acc += self._token_vector(token)
            norm = float(np.linalg.norm(acc))
            if norm == 0.0:
                # token vectors cancelled out; fall back to the whole text
                acc = self._token_vector(normalize_text(text))
                norm = float(np.linalg.norm(acc))
            out[row] = acc / norm
        return out


class SbertEncoder:
    """sentence-transformers wrapper; loads the model lazily."""

    def __init__(self, model_name: str):
        self.name = f"sbert:{model_name}"
        self._model_name = model_name
        self._model = None
        self.dim = 0

    def _load(self):
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
            except ImportError as exc:
                raise EncoderError(
                    "sentence-transformers is not installed; "
                    "pip install convembed[sbert]"
                ) from exc
            try:
                self._model = SentenceTransformer(self._model_name)
            except Exception as exc:
                raise EncoderError(
                    f"could not load model {self._model_name!r}: {exc}"
                ) from exc
            self.dim = int(self._model.get_sentence_embedding_dimension())
        return self._model

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        model = self._load()
        return np.asarray(model.encode(list(texts), show_progress_bar=False))


def resolve_encoder(name: str) -> Encoder:
    if name == "mock":
        return MockEncoder()
    if name.startswith("mock:"):
        try:
            dim = int(name.split(":", 1)[1])
        except ValueError:
            raise EncoderError(f"bad mock encoder spec {name!r}") from None
        return MockEncoder(dim=dim)
    if name.startswith("sbert:"):
        return SbertEncoder(name.split(":", 1)[1])
    raise EncoderError(
        f"unknown encoder {name!r}; use 'mock', 'mock:<dim>', or 'sbert:<model>'"
    )
