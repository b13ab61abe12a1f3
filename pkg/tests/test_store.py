import numpy as np
import pytest

from convdist.errors import (
    DimensionMismatchError,
    EmptyTextError,
    MissingEmbeddingError,
    StoreFormatError,
    ZeroVectorError,
)
from convdist.model import Conversation, Utterance
from convdist.store import EmbeddingStore, cosine_distance, utterance_key


def test_key_deterministic():
    assert utterance_key("hello world") == utterance_key("hello world")


def test_key_normalizes_whitespace_but_not_case():
    assert utterance_key("Hello   there") == utterance_key("Hello there")
    assert utterance_key("Hello there") != utterance_key("hello there")


def test_key_of_empty_text_fails():
    with pytest.raises(EmptyTextError):
        utterance_key("   \n ")


def test_key_is_hex_digest():
    key = utterance_key("abc")
    assert len(key) == 64
    assert set(key) <= set("0123456789abcdef")


def test_keys_match_golden_digests(fixtures_dir):
    import json

    golden = json.loads((fixtures_dir / "golden_keys.json").read_text(encoding="utf-8"))
    for case in golden["cases"]:
        assert utterance_key(case["text"]) == case["key"], case["text"]


def test_cosine_identical():
    v = np.array([1.0, 0.0, 0.0])
    assert cosine_distance(v, v) == 0.0


def test_cosine_orthogonal():
    assert cosine_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0


def test_cosine_antipodal():
    assert cosine_distance(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 2.0


def test_cosine_scale_invariance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        u = rng.normal(size=8)
        v = rng.normal(size=8)
        a, b = rng.uniform(0.1, 50, size=2)
        assert abs(cosine_distance(a * u, b * v) - cosine_distance(u, v)) < 1e-7


def test_cosine_self_distance_random():
    rng = np.random.default_rng(1)
    for _ in range(20):
        u = rng.normal(size=16)
        assert cosine_distance(u, u) < 1e-7


def test_cosine_dim_mismatch():
    with pytest.raises(DimensionMismatchError):
        cosine_distance(np.ones(3), np.ones(4))


def test_cosine_zero_vector():
    with pytest.raises(ZeroVectorError):
        cosine_distance(np.zeros(3), np.ones(3))


def _store(n=3, dim=4, encoder="test") -> EmbeddingStore:
    rng = np.random.default_rng(7)
    entries = {
        utterance_key(f"utterance number {i}"): rng.normal(size=dim).astype(np.float32)
        for i in range(n)
    }
    return EmbeddingStore(entries, encoder=encoder)


@pytest.mark.parametrize("encoding", ["text", "binary"])
def test_save_load_round_trip(tmp_path, encoding):
    store = _store(n=5, dim=6)
    path = str(tmp_path / f"store.{encoding}")
    store.save(path, encoding=encoding)
    loaded = EmbeddingStore.load(path)
    assert loaded.dim == store.dim
    assert loaded.encoder == store.encoder
    assert set(loaded.keys()) == set(store.keys())
    for key in store.keys():
        np.testing.assert_array_equal(loaded.lookup_key(key), store.lookup_key(key))


def test_lookup_missing_key_names_context():
    store = _store()
    utt = Utterance(speaker="Customer", text="unseen text")
    with pytest.raises(MissingEmbeddingError) as err:
        store.lookup(utt, conversation_id="conv-9")
    message = str(err.value)
    assert "unseen text" in message
    assert "conv-9" in message


def test_dim_mismatch_within_file(tmp_path):
    store = _store(n=2, dim=4)
    path = str(tmp_path / "store.txt")
    store.save(path, encoding="text")
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(utterance_key("rogue entry") + " 1.0 2.0 3.0 4.0 5.0\n")
    with pytest.raises(DimensionMismatchError):
        EmbeddingStore.load(path)


def test_count_mismatch(tmp_path):
    store = _store(n=3, dim=4)
    path = str(tmp_path / "store.txt")
    store.save(path, encoding="text")
    lines = open(path, encoding="utf-8").read().splitlines()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines[:-1]) + "\n")
    with pytest.raises(StoreFormatError) as err:
        EmbeddingStore.load(path)
    assert "count" in str(err.value)


def test_duplicate_key_rejected(tmp_path):
    store = _store(n=2, dim=3)
    path = str(tmp_path / "store.txt")
    store.save(path, encoding="text")
    lines = open(path, encoding="utf-8").read().splitlines()
    header = lines[0].replace('"count": 2', '"count": 3')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join([header] + lines[1:] + [lines[1]]) + "\n")
    with pytest.raises(StoreFormatError) as err:
        EmbeddingStore.load(path)
    assert "duplicate" in str(err.value)


def test_corrupt_header(tmp_path):
    path = str(tmp_path / "store.txt")
    with open(path, "w") as fh:
        fh.write("not a header\n")
    with pytest.raises(StoreFormatError):
        EmbeddingStore.load(path)


def test_truncated_binary(tmp_path):
    store = _store(n=3, dim=8)
    path = str(tmp_path / "store.bin")
    store.save(path, encoding="binary")
    blob = open(path, "rb").read()
    with open(path, "wb") as fh:
        fh.write(blob[:-5])
    with pytest.raises(StoreFormatError) as err:
        EmbeddingStore.load(path)
    assert "truncated" in str(err.value)


def test_non_finite_vector_rejected():
    with pytest.raises(StoreFormatError):
        EmbeddingStore({"k": np.array([1.0, float("nan")])})


def test_ragged_entries_rejected():
    with pytest.raises(DimensionMismatchError):
        EmbeddingStore({"a": np.ones(3), "b": np.ones(4)})


def test_empty_store_rejected():
    with pytest.raises(StoreFormatError):
        EmbeddingStore({})


def test_matrix_for_and_coverage():
    from convdist.model import Corpus

    texts = ["first turn", "second turn", "third turn"]
    entries = {
        utterance_key(t): np.full(4, float(i + 1), dtype=np.float32)
        for i, t in enumerate(texts)
    }
    store = EmbeddingStore(entries)
    conv = Conversation(id="c", utterances=tuple(Utterance("x", t) for t in texts))
    matrix = store.matrix_for(conv)
    assert matrix.shape == (3, 4)

    bigger = Conversation("c2", conv.utterances + (Utterance("x", "a new turn"),))
    covered, total, missing = store.coverage(Corpus((bigger,)))
    assert (covered, total) == (3, 4)
    assert missing[0][0] == "c2"
    assert missing[0][2].startswith("a new turn")
