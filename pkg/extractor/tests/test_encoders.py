import numpy as np
import pytest

from convembed.encoders import EncoderError, MockEncoder, resolve_encoder


def test_mock_deterministic_across_instances():
    texts = ["book two tickets please", "what time works for you?"]
    a = MockEncoder().encode(texts)
    b = MockEncoder().encode(texts)
    np.testing.assert_array_equal(a, b)


def test_mock_rows_unit_normalized():
    vecs = MockEncoder().encode(["one short turn", "another turn entirely"])
    norms = np.linalg.norm(vecs, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_mock_word_overlap_drives_similarity():
    enc = MockEncoder()
    base, overlap, disjoint = enc.encode([
        "please book two tickets for tonight",
        "please book three tickets for tomorrow",
        "completely unrelated gibberish utterance",
    ])
    assert float(base @ overlap) > float(base @ disjoint)


def test_mock_ignores_punctuation_and_case():
    enc = MockEncoder()
    a, b = enc.encode(["Hello, there!", "hello there"])
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_mock_handles_symbol_only_text():
    vecs = MockEncoder().encode(["?!?"])
    assert np.isfinite(vecs).all()
    assert float(np.linalg.norm(vecs[0])) == pytest.approx(1.0, abs=1e-12)


def test_mock_dim_spec():
    enc = resolve_encoder("mock:32")
    assert enc.dim == 32
    assert enc.encode(["hi"]).shape == (1, 32)


def test_mock_rejects_tiny_dim():
    with pytest.raises(EncoderError):
        resolve_encoder("mock:4")


def test_unknown_encoder_rejected():
    with pytest.raises(EncoderError):
        resolve_encoder("word2vec")
    with pytest.raises(EncoderError):
        resolve_encoder("mock:abc")


def test_sbert_resolves_lazily_without_loading():
    enc = resolve_encoder("sbert:some-model-name")
    assert enc.name == "sbert:some-model-name"
