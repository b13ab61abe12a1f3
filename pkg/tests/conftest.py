from pathlib import Path

import pytest

from convdist.model import load_corpus
from convdist.store import EmbeddingStore

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def booking_corpus():
    return load_corpus(str(FIXTURES / "booking_pair.jsonl"))


@pytest.fixture(scope="session")
def booking_store():
    return EmbeddingStore.load(str(FIXTURES / "booking_pair.embstore"))
