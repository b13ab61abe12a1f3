"""Document-level similarity baselines.

Both reduce a conversation to a single vector and take a cosine distance:
one by averaging its utterance embeddings, the other by looking up an
externally trained document vector. Both are blind to utterance order,
which is exactly the structural signal the edit-distance measures keep.
"""

from __future__ import annotations

import numpy as np

from .errors import MissingEmbeddingError, ZeroVectorError
from .model import Conversation
from .store import EmbeddingStore, cosine_distance


def mean_vector(conv: Conversation, store: EmbeddingStore) -> np.ndarray:
    """Average of the conversation's utterance embeddings (float64)."""
    matrix = store.matrix_for(conv)
    mean = matrix.mean(axis=0)
    if float(np.linalg.norm(mean)) == 0.0:
        raise ZeroVectorError(
            f"mean utterance vector of conversation {conv.id!r} is all-zero"
        )
    return mean


def avg_sem_dist(c1: Conversation, c2: Conversation, store: EmbeddingStore) -> float:
    """Cosine distance between the two conversations' mean utterance vectors."""
    return cosine_distance(mean_vector(c1, store), mean_vector(c2, store))


class DocVectorStore:
    """Document vectors keyed by conversation id.

    The on-disk format is the embedding-store format; only the key
    semantics differ (ids, not text hashes). Training the vectors happens
    outside the toolkit.
    """

    def __init__(self, store: EmbeddingStore):
        self._store = store

    @property
    def dim(self) -> int:
        return self._store.dim

    def __len__(self) -> int:
        return len(self._store)

    @classmethod
    def load(cls, path: str) -> DocVectorStore:
        return cls(EmbeddingStore.load(path))

    def lookup_id(self, conv_id: str) -> np.ndarray:
        if conv_id not in self._store:
            raise MissingEmbeddingError(f"no document vector for conversation {conv_id!r}")
        return self._store.lookup_key(conv_id)


def d2v_dist(id1: str, id2: str, docs: DocVectorStore) -> float:
    """Cosine distance of two stored document vectors."""
    return cosine_distance(docs.lookup_id(id1), docs.lookup_id(id2))
