"""Deterministic synthetic corpora with matching embedding stores.

Desk-scale stand-ins for real annotated dialog datasets: conversations are
generated from act-annotated flow skeletons with paraphrase variation, and
the synthetic embeddings place paraphrases of one turn in a tight cluster
while keeping distinct turns far apart. Everything is a pure function of
the config, so expected evaluation numbers can be pinned by seed.

Skeletons draw their turns from one shared topic pool (split into a
customer side and an agent side) in skeleton-specific orders. Flow tokens
follow topics, so two dialogs can share most of their topic bag yet differ
a lot in flow; order-blind document baselines cannot see that difference,
sequence alignment can. Same-skeleton dialogs differ only in paraphrase
choice, so their structural distance is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .model import ActAnnotation, Conversation, Corpus, Utterance
from .store import EmbeddingStore, utterance_key

_ACTS = ("GREET", "REQUEST", "INFORM", "OFFER", "CONFIRM", "ASK", "CLARIFY", "THANK")
_SLOTS = (None, "date", "location", "time", "tickets", "price", "category", "name")

_FILLERS = (
    "could you", "please", "right away", "one moment", "sure thing",
    "let me see", "of course", "thanks", "alright", "no problem",
)


@dataclass(frozen=True)
class SynthConfig:
    """Generator knobs; all derived data is deterministic given the seed."""

    n_conversations: int = 250
    n_skeletons: int = 24
    paraphrase_pool: int = 3
    noise: float = 0.08
    seed: int = 0
    pool_per_side: int = 8
    min_exchanges: int = 3
    max_exchanges: int = 4
    embed_dim: int = 32
    intra_bound: float = 0.15
    speakers: tuple[str, str] = ("customer", "agent")

    def __post_init__(self):
        if self.n_conversations < 1 or self.n_skeletons < 1:
            raise ConfigError("need at least one conversation and one skeleton")
        if self.paraphrase_pool < 1:
            raise ConfigError("paraphrase pool must be at least 1")
        if not 0.0 <= self.noise < 1.0:
            raise ConfigError("noise must be in [0, 1)")
        if not 1 <= self.min_exchanges <= self.max_exchanges:
            raise ConfigError("need 1 <= min_exchanges <= max_exchanges")
        if self.max_exchanges > self.pool_per_side:
            raise ConfigError("max_exchanges cannot exceed pool_per_side")
        if not 0.0 < self.intra_bound <= 2.0:
            raise ConfigError("intra_bound must be in (0, 2]")


def _topic_vectors(
    n_topics: int, paraphrase_pool: int, noise: float, dim: int, rng: np.random.Generator
) -> np.ndarray:
    """(n_topics, paraphrase_pool, dim) cluster vectors in the positive orthant.

    Each topic owns one coordinate; a shared positive floor plus small
    positive noise keeps every pairwise cosine non-negative while leaving
    clusters tight and well separated.
    """
    floor = 0.12 / np.sqrt(dim)
    vecs = np.zeros((n_topics, paraphrase_pool, dim))
    for t in range(n_topics):
        for v in range(paraphrase_pool):
            vec = np.full(dim, floor)
            vec[t] += 1.0
            vec += rng.uniform(0.0, noise, size=dim)
            vecs[t, v] = vec / np.linalg.norm(vec)
    return vecs


def _check_clusters(vectors: np.ndarray, intra_bound: float, noise: float) -> None:
    for cluster in vectors:
        sims = cluster @ cluster.T
        worst = float(1.0 - sims.min())
        if worst >= intra_bound:
            raise ConfigError(
                f"noise {noise} breaks the intra-cluster bound: paraphrase "
                f"distance {worst:.4f} >= {intra_bound}"
            )


def _topic_text(topic: int, variant: int) -> str:
    filler = _FILLERS[(topic * 7 + variant * 3) % len(_FILLERS)]
    return f"turn about topic {topic:03d} wording {variant} {filler}"


def _topic_annotation(topic: int) -> ActAnnotation:
    # fixed per topic so flow tokens follow topics deterministically
    return ActAnnotation(
        act=_ACTS[topic % len(_ACTS)],
        slot=_SLOTS[(topic * 3 + 1) % len(_SLOTS)],
    )


def _build_skeletons(cfg: SynthConfig, rng: np.random.Generator) -> list[list[tuple[str, int]]]:
    """Alternating (speaker, topic) sequences over the shared pools."""
    skeletons = []
    for _ in range(cfg.n_skeletons):
        exchanges = int(rng.integers(cfg.min_exchanges, cfg.max_exchanges + 1))
        cust = rng.choice(cfg.pool_per_side, size=exchanges, replace=False)
        agent = cfg.pool_per_side + rng.choice(cfg.pool_per_side, size=exchanges, replace=False)
        turns: list[tuple[str, int]] = []
        for k in range(exchanges):
            turns.append((cfg.speakers[0], int(cust[k])))
            turns.append((cfg.speakers[1], int(agent[k])))
        skeletons.append(turns)
    return skeletons


def synth_corpus(cfg: SynthConfig) -> tuple[Corpus, EmbeddingStore]:
    """Generate the corpus and its exactly matching utterance store."""
    rng = np.random.default_rng(cfg.seed)
    n_topics = 2 * cfg.pool_per_side
    dim = max(cfg.embed_dim, n_topics)
    vectors = _topic_vectors(n_topics, cfg.paraphrase_pool, cfg.noise, dim, rng)
    _check_clusters(vectors, cfg.intra_bound, cfg.noise)
    skeletons = _build_skeletons(cfg, rng)

    conversations: list[Conversation] = []
    entries: dict[str, np.ndarray] = {}
    for c in range(cfg.n_conversations):
        skel_idx = int(rng.integers(len(skeletons)))
        utterances = []
        for speaker, topic in skeletons[skel_idx]:
            variant = int(rng.integers(cfg.paraphrase_pool))
            text = _topic_text(topic, variant)
            entries.setdefault(utterance_key(text), vectors[topic, variant])
            utterances.append(
                Utterance(speaker=speaker, text=text, acts=(_topic_annotation(topic),))
            )
        conversations.append(
            Conversation(
                id=f"synth-{c:04d}",
                utterances=tuple(utterances),
                metadata={"skeleton": str(skel_idx)},
            )
        )
    corpus = Corpus(tuple(conversations))
    store = EmbeddingStore(entries, encoder="synthetic-clusters-v1")
    return corpus, store


# -- focused fixture generators ------------------------------------------


def random_dialog_corpus(
    n_dialogs: int,
    speakers: Sequence[str],
    length: int | tuple[int, int],
    dim: int = 24,
    n_topics: int = 12,
    seed: int = 0,
    alternate: bool = False,
    style: str = "topics",
) -> tuple[Corpus, EmbeddingStore]:
    """Random dialogs over the given speaker set, positive-orthant embeddings.

    ``style="topics"`` gives each utterance a near-one-hot topic vector, so
    pairwise cosines range from near-orthogonal to near-identical.
    ``style="band"`` draws dense uniform-positive vectors instead, which
    concentrates all pairwise cosines in a narrow band the way unrelated
    sentences behave under a real encoder (no accidental near-duplicates).
    Speakers are drawn per utterance unless ``alternate`` pins them to
    position parity. All cosines are non-negative either way.
    """
    if n_topics > dim:
        raise ConfigError("n_topics cannot exceed dim")
    if style not in ("topics", "band"):
        raise ConfigError(f"unknown style {style!r}")
    rng = np.random.default_rng(seed)
    floor = 0.12 / np.sqrt(dim)
    conversations = []
    entries: dict[str, np.ndarray] = {}
    for d in range(n_dialogs):
        if isinstance(length, tuple):
            m = int(rng.integers(length[0], length[1] + 1))
        else:
            m = length
        utterances = []
        for i in range(m):
            if alternate:
                speaker = speakers[i % len(speakers)]
            else:
                speaker = speakers[int(rng.integers(len(speakers)))]
            topic = int(rng.integers(n_topics))
            text = f"dialog {d:03d} turn {i:02d} topic {topic:02d}"
            if style == "topics":
                vec = np.full(dim, floor)
                vec[topic] += 1.0
                vec += rng.uniform(0.0, 0.1, size=dim)
            else:
                text += f" draw {d * 1000 + i}"
                vec = rng.uniform(0.2, 1.0, size=dim)
            entries[utterance_key(text)] = vec / np.linalg.norm(vec)
            utterances.append(
                Utterance(speaker=speaker, text=text, acts=(_topic_annotation(topic),))
            )
        conversations.append(
            Conversation(id=f"rand-{d:04d}", utterances=tuple(utterances))
        )
    return Corpus(tuple(conversations)), EmbeddingStore(entries, encoder="synthetic-random-v1")


def alternating_clustered_corpus(
    n_dialogs: int,
    length: int = 8,
    n_topics_per_speaker: int = 6,
    seed: int = 0,
    speakers: tuple[str, str] = ("customer", "agent"),
) -> tuple[Corpus, EmbeddingStore]:
    """Rigidly alternating dialogs whose speaker embeddings never mix.

    Customer and agent vectors occupy disjoint coordinate blocks, so every
    cross-speaker cosine is exactly zero and a cross-speaker substitution
    (cost alpha > 2) can never beat the insert+delete detour (cost 2): the
    actor constraint is vacuous by construction.
    """
    if length % 2 != 0:
        raise ConfigError("length must be even for rigid alternation")
    rng = np.random.default_rng(seed)
    dim = 2 * n_topics_per_speaker
    conversations = []
    entries: dict[str, np.ndarray] = {}
    for d in range(n_dialogs):
        utterances = []
        for i in range(length):
            side = i % 2
            topic = int(rng.integers(n_topics_per_speaker))
            text = f"alt dialog {d:03d} turn {i:02d} topic {topic:02d} side {side}"
            vec = np.zeros(dim)
            base = side * n_topics_per_speaker
            vec[base + topic] = 1.0
            noise = rng.uniform(0.0, 0.08, size=n_topics_per_speaker)
            vec[base : base + n_topics_per_speaker] += noise
            entries[utterance_key(text)] = vec / np.linalg.norm(vec)
            utterances.append(
                Utterance(
                    speaker=speakers[side],
                    text=text,
                    acts=(_topic_annotation(base + topic),),
                )
            )
        conversations.append(
            Conversation(id=f"alt-{d:04d}", utterances=tuple(utterances))
        )
    return Corpus(tuple(conversations)), EmbeddingStore(entries, encoder="synthetic-split-v1")


def cross_speaker_paraphrase_corpus(
    n_pairs: int,
    seed: int = 0,
    speakers: tuple[str, str] = ("customer", "agent"),
) -> tuple[Corpus, EmbeddingStore]:
    """Dialog pairs where a topic switches speakers between the two dialogs.

    The second dialog of each pair swaps two adjacent turns, so the same
    topic cluster appears once as a customer turn and once as an agent
    turn. Relaxing the actor constraint lets those near-identical vectors
    substitute cheaply; enforcing it forbids exactly that, so the two
    settings genuinely diverge.
    """
    rng = np.random.default_rng(seed)
    n_topics = 4 * n_pairs + 4
    dim = n_topics
    floor = 0.1 / np.sqrt(dim)

    def vec_for(topic: int) -> np.ndarray:
        v = np.full(dim, floor)
        v[topic] += 1.0
        v += rng.uniform(0.0, 0.05, size=dim)
        return v / np.linalg.norm(v)

    conversations = []
    entries: dict[str, np.ndarray] = {}

    def add_dialog(conv_id: str, turns: list[tuple[str, int, int]]):
        utterances = []
        for i, (speaker, topic, variant) in enumerate(turns):
            text = f"{conv_id} turn {i} topic {topic:02d} v{variant}"
            entries[utterance_key(text)] = vec_for(topic)
            utterances.append(
                Utterance(speaker=speaker, text=text, acts=(_topic_annotation(topic),))
            )
        conversations.append(Conversation(id=conv_id, utterances=tuple(utterances)))

    cust, agent = speakers
    for p in range(n_pairs):
        t = 4 * p
        base = [(cust, t, 0), (agent, t + 1, 0), (cust, t + 2, 0), (agent, t + 3, 0)]
        # swapped middle: topics t+1 / t+2 change speakers between dialogs
        swapped = [(cust, t, 1), (agent, t + 2, 1), (cust, t + 1, 1), (agent, t + 3, 1)]
        add_dialog(f"xsp-{p:03d}-a", base)
        add_dialog(f"xsp-{p:03d}-b", swapped)
    return Corpus(tuple(conversations)), EmbeddingStore(entries, encoder="synthetic-xsp-v1")
