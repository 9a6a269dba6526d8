from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import dataset_of
from veracity.baseline import (
    load_model,
    predict,
    predict_dataset,
    save_model,
    tokenize,
    train,
)
from veracity.corpus import Dataset, Label, NewsItem
from veracity.errors import DegenerateTraining
from veracity.preprocess import CleanPolicy, clean_text


def posterior_oracle(corpus, text, alpha=1):
    """Direct enumeration of the smoothed-count formula, in exact
    arithmetic. corpus: list of (token-list, Label)."""
    classes = [Label.REAL, Label.FAKE]
    alpha = Fraction(alpha)
    vocabulary = sorted({t for tokens, _ in corpus for t in tokens})
    doc_counts = {c: sum(1 for _, label in corpus if label is c) for c in classes}
    total_docs = sum(doc_counts.values())
    weights = {}
    for c in classes:
        token_counts = {}
        for tokens, label in corpus:
            if label is c:
                for t in tokens:
                    token_counts[t] = token_counts.get(t, 0) + 1
        denominator = sum(token_counts.values()) + alpha * len(vocabulary)
        weight = Fraction(doc_counts[c], total_docs)
        for t in text:
            if t in vocabulary:
                weight *= (token_counts.get(t, 0) + alpha) / denominator
        weights[c] = weight
    z = weights[Label.REAL] + weights[Label.FAKE]
    return weights[Label.REAL] / z, weights[Label.FAKE] / z


TWO_ITEM = dataset_of((1, "good vaccine", "real"), (2, "hoax cure", "fake"))


def test_two_item_posterior_matches_hand_computation():
    model = train(TWO_ITEM, alpha=1.0)
    vector = predict(model, "good vaccine")
    expected_real, _ = posterior_oracle(
        [(["good", "vaccine"], Label.REAL), (["hoax", "cure"], Label.FAKE)],
        ["good", "vaccine"],
    )
    assert expected_real == Fraction(4, 5)  # verified by hand
    assert abs(vector.p_real - 0.8) <= 1e-12
    assert vector.p_real > 0.5


def test_training_sentences_favor_their_own_class():
    model = train(TWO_ITEM)
    assert predict(model, "good vaccine").p_real > 0.5
    assert predict(model, "hoax cure").p_fake > 0.5


def test_empty_dataset_degenerate():
    with pytest.raises(DegenerateTraining):
        train(Dataset((), "empty"))


def test_single_class_degenerate():
    with pytest.raises(DegenerateTraining):
        train(dataset_of((1, "a", "real"), (2, "b", "real")))


def test_empty_string_returns_priors():
    dataset = dataset_of((1, "x", "real"), (2, "y", "real"), (3, "z", "fake"))
    model = train(dataset)
    vector = predict(model, "")
    assert abs(vector.p_real - 2 / 3) <= 1e-12


def test_oov_only_text_returns_priors():
    dataset = dataset_of((1, "x", "real"), (2, "y", "real"), (3, "z", "fake"))
    model = train(dataset)
    vector = predict(model, "completely unseen words")
    assert abs(vector.p_real - 2 / 3) <= 1e-12


def test_posterior_invariant_to_token_order():
    model = train(TWO_ITEM)
    forward = predict(model, "good vaccine hoax")
    backward = predict(model, "hoax vaccine good")
    assert forward.p_real == backward.p_real


@given(st.text(max_size=30))
def test_prediction_normalized(text):
    model = train(TWO_ITEM)
    vector = predict(model, text)
    assert abs(vector.p_real + vector.p_fake - 1.0) <= 1e-9
    assert 0.0 <= vector.p_real <= 1.0


def test_likelihoods_normalize_over_vocabulary():
    import math

    model = train(TWO_ITEM)
    for c, likelihoods in model.token_log_likelihoods.items():
        total = sum(math.exp(v) for v in likelihoods.values())
        assert abs(total - 1.0) <= 1e-9


WORDS = ["up", "down", "left", "right", "mid"]


@pytest.mark.parametrize("seed", range(12))
def test_brute_force_oracle_small_corpora(seed):
    # vocabulary <= 5, corpus <= 6 items: enumeration of the smoothed
    # count formula must match the log-space implementation to 1e-9.
    rng = random.Random(seed)
    corpus = []
    n_items = rng.randrange(2, 7)
    for i in range(n_items):
        label = Label.REAL if i == 0 else Label.FAKE if i == 1 else (
            Label.REAL if rng.random() < 0.5 else Label.FAKE
        )
        tokens = [rng.choice(WORDS) for _ in range(rng.randrange(1, 5))]
        corpus.append((tokens, label))
    dataset = Dataset(
        tuple(NewsItem(i, " ".join(t), label) for i, (t, label) in enumerate(corpus)),
        "oracle",
    )
    alpha = rng.choice([0.5, 1.0, 2.0])
    model = train(dataset, alpha=alpha)
    for _ in range(5):
        query = [rng.choice(WORDS) for _ in range(rng.randrange(0, 6))]
        expected_real, expected_fake = posterior_oracle(corpus, query, alpha)
        got = predict(model, " ".join(query))
        assert abs(got.p_real - float(expected_real)) <= 1e-9
        assert abs(got.p_fake - float(expected_fake)) <= 1e-9


def test_duplicated_corpus_identical_posteriors_with_scaled_alpha():
    # Doubling every item doubles every count; the smoothed ratios are
    # unchanged exactly when alpha doubles with them.
    doubled = dataset_of(
        (1, "good vaccine", "real"), (2, "hoax cure", "fake"),
        (3, "good vaccine", "real"), (4, "hoax cure", "fake"),
    )
    base_model = train(TWO_ITEM, alpha=1.0)
    doubled_model = train(doubled, alpha=2.0)
    for text in ("good vaccine", "hoax", "good cure", ""):
        assert abs(predict(base_model, text).p_real
                   - predict(doubled_model, text).p_real) <= 1e-12


def test_duplicated_corpus_fixed_alpha_keeps_labels():
    # With alpha held fixed the smoothing weight halves relative to the
    # counts, so posteriors sharpen; the argmax labels stay put.
    doubled = dataset_of(
        (1, "good vaccine", "real"), (2, "hoax cure", "fake"),
        (3, "good vaccine", "real"), (4, "hoax cure", "fake"),
    )
    base_model = train(TWO_ITEM, alpha=1.0)
    doubled_model = train(doubled, alpha=1.0)
    for text in ("good vaccine", "hoax cure", "good", "cure"):
        base = predict(base_model, text)
        second = predict(doubled_model, text)
        assert (base.p_real > base.p_fake) == (second.p_real > second.p_fake)


def test_save_load_round_trip(tmp_path):
    dataset = dataset_of(
        (1, "good vaccine news", "real"),
        (2, "hoax cure exposed", "fake"),
        (3, "vaccine update", "real"),
    )
    model = train(dataset, alpha=0.7, model_name="bow-test")
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.model_name == "bow-test"
    assert loaded.smoothing_alpha == 0.7
    for text in ("vaccine", "hoax exposed", "nothing known"):
        assert predict(loaded, text) == predict(model, text, item_id=-1)


def test_predict_dataset_carries_item_ids():
    model = train(TWO_ITEM)
    vectors = predict_dataset(model, TWO_ITEM)
    assert [v.item_id for v in vectors] == [1, 2]
    assert all(v.model_name == model.model_name for v in vectors)


def test_cleaning_policy_applied_before_tokenizing():
    # Mentions and URLs never reach the vocabulary under the default policy.
    dataset = dataset_of(
        (1, "good @handle https://x.com/a", "real"), (2, "bad stuff", "fake")
    )
    model = train(dataset)
    assert "handle" not in model.vocabulary
    assert "x" not in model.vocabulary
    assert tokenize(clean_text("good @handle", CleanPolicy())) == ["good"]
