import json
import math

import numpy as np
import pytest

from convdist import evaluate
from convdist.conved import ConvEDConfig
from convdist.errors import ConfigError, MeasureError
from convdist.evaluate import pairwise_matrix
from convdist.synth import SynthConfig, synth_corpus
from convdist.triplets import (
    Triplet,
    agreement_ratio,
    parse_labels,
    sample_disagreement_triplets,
    triplet_records,
)


@pytest.fixture(scope="module")
def corpus_and_matrices():
    corpus, store = synth_corpus(SynthConfig(n_conversations=30, n_skeletons=10, seed=3))
    conved = pairwise_matrix(
        corpus, evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2)), measure="conved"
    )
    avgsem = pairwise_matrix(corpus, evaluate.avgsem_pair_fn(store), measure="avgsem")
    structed = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    return corpus, store, conved, avgsem, structed


def test_identical_measures_no_disagreements(corpus_and_matrices):
    _, _, conved, _, _ = corpus_and_matrices
    with pytest.warns(UserWarning):
        sample = sample_disagreement_triplets(conved, conved, n=5, seed=1, max_draws=500)
    assert sample.triplets == []
    assert sample.n_disagreements == 0
    assert sample.agreement_ratio == 1.0


def test_returned_triplets_reverify_as_contrasting(corpus_and_matrices):
    _, _, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=15, seed=2)
    assert sample.triplets
    for t in sample.triplets:
        d1 = conved.value(t.anchor_id, t.cand1_id) - conved.value(t.anchor_id, t.cand2_id)
        d2 = avgsem.value(t.anchor_id, t.cand1_id) - avgsem.value(t.anchor_id, t.cand2_id)
        assert d1 != 0 and d2 != 0
        assert math.copysign(1, d1) != math.copysign(1, d2)
        assert t.verdict_of("conved") != t.verdict_of("avgsem")


def test_triplets_have_distinct_members(corpus_and_matrices):
    _, _, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=10, seed=4)
    for t in sample.triplets:
        assert len({t.anchor_id, t.cand1_id, t.cand2_id}) == 3


def test_sampling_deterministic(corpus_and_matrices):
    _, _, conved, avgsem, _ = corpus_and_matrices
    s1 = sample_disagreement_triplets(conved, avgsem, n=10, seed=7)
    s2 = sample_disagreement_triplets(conved, avgsem, n=10, seed=7)
    assert s1.triplets == s2.triplets
    assert s1.to_dict() == s2.to_dict()


def test_budget_exhaustion_warns(corpus_and_matrices):
    _, _, conved, avgsem, _ = corpus_and_matrices
    with pytest.warns(UserWarning):
        sample = sample_disagreement_triplets(conved, avgsem, n=10000, seed=1, max_draws=50)
    assert sample.exhausted_budget
    assert len(sample.triplets) < 10000


def test_mismatched_matrices_rejected(corpus_and_matrices):
    _, _, conved, _, _ = corpus_and_matrices
    other = pairwise_matrix(
        synth_corpus(SynthConfig(n_conversations=5, n_skeletons=2, seed=9))[0],
        evaluate.structed_pair_fn(),
    )
    with pytest.raises(ConfigError):
        sample_disagreement_triplets(conved, other, n=1, seed=0)


def test_export_machine_records(corpus_and_matrices):
    corpus, _, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=5, seed=11)
    records = triplet_records(sample)
    assert len(records) == len(sample.triplets)
    for rec in records:
        assert set(rec) == {"triplet_id", "anchor_id", "cand1_id", "cand2_id", "verdicts"}
        assert set(rec["verdicts"]) == {"conved", "avgsem"}


def test_export_annotation_variant_withholds_verdicts(corpus_and_matrices):
    corpus, _, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=5, seed=11)
    records = triplet_records(sample, corpus=corpus, for_annotation=True)
    for rec in records:
        assert "verdicts" not in rec
        assert rec["anchor"][0]["text"]
        assert rec["cand1"] and rec["cand2"]


def test_labels_round_trip_and_ratio(corpus_and_matrices):
    corpus, store, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=12, seed=13)
    records = triplet_records(sample)
    pair_fn = evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2))

    # labels generated from the measure itself -> perfect agreement
    labels_json = [
        json.dumps({
            "triplet_id": rec["triplet_id"],
            "chosen": str(rec["verdicts"]["conved"]),
            "agreement": 1.0,
        })
        for rec in records
    ]
    report = agreement_ratio(records, parse_labels(labels_json), pair_fn, corpus,
                             measure="conved")
    assert report.ratio == 1.0

    # inverted labels -> zero agreement
    inverted = [
        json.dumps({
            "triplet_id": rec["triplet_id"],
            "chosen": "2" if rec["verdicts"]["conved"] == 1 else "1",
            "agreement": 1.0,
        })
        for rec in records
    ]
    report = agreement_ratio(records, parse_labels(inverted), pair_fn, corpus)
    assert report.ratio == 0.0


def test_agreement_filters_low_agreement_and_undecided(corpus_and_matrices):
    corpus, store, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=6, seed=17)
    records = triplet_records(sample)
    pair_fn = evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2))
    labels = []
    for k, rec in enumerate(records):
        if k == 0:
            labels.append({"triplet_id": rec["triplet_id"], "chosen": "undecided", "agreement": 1.0})
        elif k == 1:
            labels.append({"triplet_id": rec["triplet_id"], "chosen": "1", "agreement": 0.6})
        else:
            labels.append({
                "triplet_id": rec["triplet_id"],
                "chosen": str(rec["verdicts"]["conved"]),
                "agreement": 0.9,
            })
    parsed = parse_labels([json.dumps(l) for l in labels])
    report = agreement_ratio(records, parsed, pair_fn, corpus, min_agreement=0.8)
    assert report.skipped_undecided == 1
    assert report.skipped_low_agreement == 1
    assert report.retained == len(records) - 2
    assert report.ratio == 1.0


def test_agreement_empty_after_filtering(corpus_and_matrices):
    corpus, store, conved, avgsem, _ = corpus_and_matrices
    sample = sample_disagreement_triplets(conved, avgsem, n=3, seed=19)
    records = triplet_records(sample)
    pair_fn = evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2))
    labels = parse_labels([
        json.dumps({"triplet_id": rec["triplet_id"], "chosen": "1", "agreement": 0.2})
        for rec in records
    ])
    with pytest.raises(MeasureError):
        agreement_ratio(records, labels, pair_fn, corpus)


def test_parse_labels_validation():
    with pytest.raises(ConfigError):
        parse_labels(['{"triplet_id": "t1", "chosen": "3", "agreement": 1.0}'])
    with pytest.raises(ConfigError):
        parse_labels(['{"triplet_id": "t1", "chosen": "1", "agreement": 1.5}'])
    with pytest.raises(ConfigError):
        parse_labels(["{broken"])


def test_unknown_triplet_reference():
    labels = parse_labels(['{"triplet_id": "zzz", "chosen": "1", "agreement": 1.0}'])
    with pytest.raises(ConfigError):
        agreement_ratio([], labels, lambda a, b: 0.0, None)
