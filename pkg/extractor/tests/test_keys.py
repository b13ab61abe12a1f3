import json
from pathlib import Path

import pytest

from convembed.keys import normalize_text, utterance_key

FIXTURES = Path(__file__).parent / "fixtures"


def test_keys_match_golden_digests():
    golden = json.loads((FIXTURES / "golden_keys.json").read_text(encoding="utf-8"))
    assert golden["cases"], "golden fixture must not be empty"
    for case in golden["cases"]:
        assert utterance_key(case["text"]) == case["key"], case["text"]


def test_normalization_rules():
    assert normalize_text("  a   b \t c \n") == "a b c"
    assert normalize_text("Case Kept") == "Case Kept"


def test_same_key_for_whitespace_variants():
    assert utterance_key("hello  world") == utterance_key("hello world")


def test_distinct_keys_for_case_variants():
    assert utterance_key("Hello") != utterance_key("hello")


def test_empty_text_rejected():
    with pytest.raises(ValueError):
        utterance_key("   ")
