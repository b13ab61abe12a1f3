#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures.

The booking-pair store is a hand-designed semantic stand-in for a real
sentence encoder (CI cannot download encoder weights): utterances that a
real encoder would place close together share a topic coordinate, all
vectors live in the positive orthant, and identical texts share one store
entry. Deterministic; safe to re-run.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from convdist.conved import ConvEDConfig, conv_ed
from convdist.model import Conversation, Corpus, Utterance, save_corpus
from convdist.store import EmbeddingStore, utterance_key

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# (speaker, text, topic): one topic per aligned row, so the matched pairs
# across the two dialogs share a topic and everything else is far apart.
CONV_A = [
    ("Customer", "I'd like to look for a film to watch. I like adventure films.", 0),
    ("Agent", "Where are you located?", 1),
    ("Customer", "Could you look for films shown in Napa?", 2),
    ("Agent", "I discovered 1 movie - would you like Dumbo?", 3),
    ("Customer", "I'd love Captain Marvel. When can I watch it? I'd like to watch a regular show.", 6),
    ("Agent", "What time would you like to watch it?", 7),
    ("Customer", "I'd like to watch it on the day after tomorrow.", 8),
    ("Agent", "I discovered 1 showtime for the film in Century Napa Valley and XD Theater at 10:30 pm.", 9),
    ("Customer", "That sounds wonderful; that's all.", 10),
    ("Agent", "Have a pleasant afternoon.", 11),
]

CONV_B = [
    ("Customer", "I'd like to search for a fun film to watch.", 0),
    ("Agent", "What is your location?", 1),
    ("Customer", "Could you find films shown in San Ramon for me?", 2),
    ("Agent", "What is your take on Breakthrough or Captain Marvel?", 3),
    ("Customer", "Please look for other films. I would like to watch at The Lot City Center.", 4),
    ("Agent", "What is your take on Hellboy, Little, or Missing Link?", 5),
    ("Customer", "Little is the one for me. When can I watch it? I'd like to watch it today.", 6),
    ("Agent", "I discovered 1 showtime for the film at 2:30 pm in The Lot City Center.", 9),
    ("Customer", "That sounds perfect for me; that's all for now.", 10),
    ("Agent", "Have a pleasant afternoon.", 11),
]

DIM = 64


def build_booking_fixture() -> tuple[Corpus, EmbeddingStore]:
    rng = np.random.default_rng(20240101)
    floor = 0.30 / np.sqrt(DIM)
    entries: dict[str, np.ndarray] = {}

    def add(text: str, topic: int) -> None:
        key = utterance_key(text)
        if key in entries:
            return
        vec = np.full(DIM, floor)
        vec[topic] += 1.0
        vec += rng.uniform(0.0, 0.06, size=DIM)
        entries[key] = vec / np.linalg.norm(vec)

    conversations = []
    for conv_id, rows in (("movie-booking-a", CONV_A), ("movie-booking-b", CONV_B)):
        utterances = []
        for speaker, text, topic in rows:
            add(text, topic)
            utterances.append(Utterance(speaker=speaker, text=text))
        conversations.append(Conversation(id=conv_id, utterances=tuple(utterances)))
    corpus = Corpus(tuple(conversations))
    store = EmbeddingStore(entries, encoder="fixture-semantic-v1")
    return corpus, store


def describe(script) -> list[str]:
    return [
        f"{s.op[:3]}({s.source},{s.target})" if s.op == "substitute"
        else (f"del({s.source})" if s.op == "delete" else f"ins({s.target})")
        for s in script
    ]


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    corpus, store = build_booking_fixture()

    c1 = corpus.get("movie-booking-a")
    c2 = corpus.get("movie-booking-b")
    tuned = conv_ed(c1, c2, store, ConvEDConfig(alpha=2.2))
    flat = conv_ed(c1, c2, store, ConvEDConfig(alpha=1.0))
    print("alpha=2.2:", describe(tuned.script))
    print("  distance:", repr(tuned.distance))
    print("alpha=1.0:", describe(flat.script))
    print("  distance:", repr(flat.distance))

    expected = [
        "sub(0,0)", "sub(1,1)", "sub(2,2)", "sub(3,3)",
        "ins(4)", "ins(5)", "sub(4,6)", "del(5)", "del(6)",
        "sub(7,7)", "sub(8,8)", "sub(9,9)",
    ]
    assert describe(tuned.script) == expected, "tuned alignment drifted"
    assert all(s.op == "substitute" for s in flat.script), "alpha=1 should be substitution-only"

    save_corpus(corpus, str(FIXTURES / "booking_pair.jsonl"))
    store.save(str(FIXTURES / "booking_pair.embstore"), encoding="text")
    print(f"wrote {FIXTURES / 'booking_pair.jsonl'}")
    print(f"wrote {FIXTURES / 'booking_pair.embstore'} ({len(store)} entries, dim {store.dim})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
