import numpy as np
import pytest

from convdist import evaluate
from convdist.conved import ConvEDConfig
from convdist.errors import ConfigError, CorrelationUndefinedError, MeasureError
from convdist.evaluate import (
    MeasureSpec,
    bootstrap_from_matrices,
    build_pair_fn,
    pairwise_matrix,
    pearson,
    significance_test,
    tune_alpha,
)
from convdist.model import ActAnnotation, Conversation, Corpus, Utterance
from convdist.synth import SynthConfig, random_dialog_corpus, synth_corpus

from oracles import naive_pearson, welch_p_value


# -- pearson --------------------------------------------------------------


def test_pearson_perfect_linear():
    assert pearson([1, 2, 3, 4], [3, 5, 7, 9]) == 1.0  # y = 2x + 1


def test_pearson_perfect_negative():
    assert pearson([1.0, 2.0, 5.0], [-1.0, -2.0, -5.0]) == -1.0


def test_pearson_hand_computed_half():
    assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-15)


def test_pearson_self_correlation_exactly_one():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=50)
        assert pearson(x, x) == 1.0


def test_pearson_matches_naive_two_pass():
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.normal(size=40)
        y = rng.normal(size=40)
        assert pearson(x, y) == pytest.approx(naive_pearson(list(x), list(y)), abs=1e-12)


def test_pearson_constant_input_error():
    with pytest.raises(CorrelationUndefinedError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_pearson_too_few_points():
    with pytest.raises(CorrelationUndefinedError):
        pearson([1.0], [2.0])


def test_pearson_shape_mismatch():
    with pytest.raises(ConfigError):
        pearson([1.0, 2.0], [1.0, 2.0, 3.0])


# -- significance ----------------------------------------------------------


def test_significance_identical_zero_variance_lists():
    assert significance_test([0.5, 0.5, 0.5], [0.5, 0.5, 0.5]) == 1.0


def test_significance_zero_variance_different_means():
    assert significance_test([0.5, 0.5], [0.2, 0.2]) == 0.0


def test_significance_clearly_separated_samples():
    rng = np.random.default_rng(2)
    a = rng.normal(0.54, 0.02, size=100)
    b = rng.normal(0.27, 0.02, size=100)
    assert significance_test(a, b) < 1e-3


def test_significance_symmetric_in_arguments():
    rng = np.random.default_rng(3)
    a = rng.normal(0.5, 0.1, size=30)
    b = rng.normal(0.4, 0.1, size=30)
    assert significance_test(a, b) == significance_test(b, a)


def test_significance_matches_reference_formulas():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.normal(0.0, 1.0, size=25)
        b = rng.normal(0.3, 1.5, size=40)
        assert significance_test(a, b) == pytest.approx(welch_p_value(a, b), rel=1e-9)


# -- pairwise matrix --------------------------------------------------------


def _flow_corpus(token_lists):
    convs = []
    for k, tokens in enumerate(token_lists):
        utts = tuple(
            Utterance("x", f"c{k} turn {i}", acts=(ActAnnotation(t),))
            for i, t in enumerate(tokens)
        )
        convs.append(Conversation(id=f"c{k}", utterances=utts))
    return Corpus(tuple(convs))


def test_pairwise_matrix_three_conversations():
    corpus = _flow_corpus([["A", "B"], ["A", "C"], ["B", "C"]])
    matrix = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    assert np.array_equal(matrix.values, matrix.values.T)
    assert np.all(np.diag(matrix.values) == 0)
    off = matrix.upper()
    assert off.shape == (3,)
    assert np.all(off > 0)


def test_pairwise_matrix_identical_conversations_all_zero():
    corpus = _flow_corpus([["A", "B"], ["A", "B"], ["A", "B"]])
    matrix = pairwise_matrix(corpus, evaluate.structed_pair_fn())
    assert np.all(matrix.values == 0.0)


def test_pairwise_matrix_spot_checks_direct_measure():
    corpus, store = random_dialog_corpus(6, ["C", "A"], (3, 6), seed=17)
    pair_fn = evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2))
    matrix = pairwise_matrix(corpus, pair_fn, measure="conved")
    convs = list(corpus)
    rng = np.random.default_rng(0)
    for _ in range(5):
        i, j = rng.choice(len(convs), size=2, replace=False)
        assert matrix.values[i, j] == pytest.approx(
            pair_fn(convs[i], convs[j]), abs=1e-12
        )


def test_pairwise_matrix_wraps_measure_errors():
    corpus = _flow_corpus([["A"], ["B"]])

    def broken(c1, c2):
        raise ValueError("boom")

    with pytest.raises(MeasureError) as err:
        pairwise_matrix(corpus, broken, measure="broken")
    assert "c0" in str(err.value) and "c1" in str(err.value)


# -- bootstrap ---------------------------------------------------------------


@pytest.fixture(scope="module")
def small_synth():
    return synth_corpus(SynthConfig(n_conversations=40, n_skeletons=10, seed=5))


def test_bootstrap_self_correlation_is_exactly_one(small_synth):
    corpus, _store = small_synth
    ref = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    report = bootstrap_from_matrices(ref, ref, n_samples=10, sample_size=20, seed=1)
    assert report.per_sample_r == [1.0] * 10
    assert report.mean_r == 1.0


def test_bootstrap_deterministic_byte_identical(small_synth):
    corpus, store = small_synth
    ref = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    mm = pairwise_matrix(
        corpus, evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2)), measure="conved"
    )
    a = bootstrap_from_matrices(mm, ref, n_samples=12, sample_size=25, seed=9)
    b = bootstrap_from_matrices(mm, ref, n_samples=12, sample_size=25, seed=9)
    assert a.to_json() == b.to_json()


def test_bootstrap_seed_changes_samples(small_synth):
    corpus, store = small_synth
    ref = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    mm = pairwise_matrix(
        corpus, evaluate.conved_pair_fn(store, ConvEDConfig(alpha=2.2)), measure="conved"
    )
    a = bootstrap_from_matrices(mm, ref, n_samples=12, sample_size=25, seed=9)
    b = bootstrap_from_matrices(mm, ref, n_samples=12, sample_size=25, seed=10)
    assert a.per_sample_r != b.per_sample_r


def test_bootstrap_corpus_too_small(small_synth):
    corpus, _store = small_synth
    ref = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    with pytest.raises(ConfigError):
        bootstrap_from_matrices(ref, ref, n_samples=2, sample_size=100, seed=0)


def test_bootstrap_r_in_range(small_synth):
    corpus, store = small_synth
    ref = pairwise_matrix(corpus, evaluate.structed_pair_fn(), measure="structed")
    mm = pairwise_matrix(
        corpus, evaluate.avgsem_pair_fn(store), measure="avgsem"
    )
    report = bootstrap_from_matrices(mm, ref, n_samples=20, sample_size=20, seed=2)
    assert all(-1.0 <= r <= 1.0 for r in report.per_sample_r)


# -- tune_alpha ---------------------------------------------------------------


def test_tune_alpha_single_value_grid(small_synth):
    corpus, store = small_synth
    result = tune_alpha(corpus, store, alpha_grid=[2.0])
    assert result.best_alpha == 2.0
    assert len(result.grid) == 1


def test_tune_alpha_deterministic(small_synth):
    corpus, store = small_synth
    g1 = tune_alpha(corpus, store, alpha_grid=[1.0, 2.0, 3.0])
    g2 = tune_alpha(corpus, store, alpha_grid=[1.0, 2.0, 3.0])
    assert g1.best_alpha == g2.best_alpha
    assert g1.grid == g2.grid


def test_tune_alpha_prefers_gaps_over_degenerate_alignment():
    corpus, store = synth_corpus(SynthConfig(n_conversations=48, n_skeletons=12, seed=101))
    result = tune_alpha(corpus, store)
    rs = [r for _a, r in result.grid if r is not None]
    assert result.best_alpha > 1.0
    assert max(rs) > min(rs)


def test_tune_alpha_empty_grid():
    corpus, store = random_dialog_corpus(4, ["x"], 3, seed=0)
    with pytest.raises(ConfigError):
        tune_alpha(corpus, store, alpha_grid=[])


def test_default_alpha_grid_exact_decimals():
    grid = evaluate.default_alpha_grid()
    assert grid[0] == 1.0
    assert grid[-1] == 5.0
    assert len(grid) == 41
    assert 2.2 in grid and 2.7 in grid


# -- measure specs -------------------------------------------------------------


def test_measure_spec_requires_alpha_for_conved():
    with pytest.raises(ConfigError):
        MeasureSpec(name="conved")


def test_measure_spec_unknown_name():
    with pytest.raises(ConfigError):
        MeasureSpec(name="levenshtein")


def test_build_pair_fn_requires_store():
    with pytest.raises(ConfigError):
        build_pair_fn(MeasureSpec(name="avgsem"))


def test_conved_relaxed_spec_disables_enforcement():
    spec = MeasureSpec(name="conved-relaxed", alpha=2.2)
    assert spec.conved_config().enforce_actor is False
    spec2 = MeasureSpec(name="conved", alpha=2.2)
    assert spec2.conved_config().enforce_actor is True
