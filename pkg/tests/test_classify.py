import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermes import data_path
from hermes.classify import (ClassifierModel, DatasetError, Example, TrainingError, auc, classify_damage,
                             featurize, filter_relevant, load_corpus, score, split_dataset, train,
                             write_corpus)
from hermes.oracles import pairwise_auc
from hermes.world import RawMessage


def toy_corpus(n=200, seed=0):
    rng = random.Random(seed)
    pos_words = ["alpha", "bravo", "charlie", "delta"]
    neg_words = ["xray", "yankee", "zulu", "whiskey"]
    out = []
    for i in range(n):
        words = pos_words if i % 2 == 0 else neg_words
        out.append(Example(" ".join(rng.choice(words) for _ in range(5)), i % 2 == 0))
    return out


def test_featurize_basics():
    assert len(featurize("").indices) == 0
    a, b = featurize("Quake quake"), featurize("quake quake")
    assert np.array_equal(a.indices, b.indices) and np.allclose(a.values, b.values)


@given(st.text(min_size=1, max_size=80))
def test_featurize_unit_norm(text):
    fv = featurize(text)
    if len(fv.indices):
        assert abs(np.linalg.norm(fv.values) - 1.0) < 1e-9
        assert np.all(np.diff(fv.indices) > 0)


def test_split_is_stratified():
    corpus = [Example(f"t{i}", i < 50) for i in range(100)]
    tr, va, te = split_dataset(corpus, seed=3)
    assert (len(tr), len(va), len(te)) == (64, 16, 20)
    assert [sum(e.label for e in part) for part in (tr, va, te)] == [32, 8, 10]
    assert split_dataset(corpus, seed=3) == (tr, va, te)
    assert not ({e.text for e in tr} & {e.text for e in te})


def test_split_needs_both_classes():
    with pytest.raises(DatasetError):
        split_dataset([Example("a", False)] * 10)


def test_separable_corpus_auc_one():
    _, report = train(toy_corpus(), return_report=True)
    assert report.auc == 1.0


def test_shuffled_labels_near_chance():
    corpus = load_corpus(data_path("corpus_relevance.jsonl"), "relevance")
    rng = random.Random(5)
    labels = [e.label for e in corpus]
    rng.shuffle(labels)
    shuffled = [Example(e.text, y, e.task) for e, y in zip(corpus, labels)]
    _, report = train(shuffled, return_report=True)
    assert 0.4 <= report.auc <= 0.6


def test_divergence_raises():
    with pytest.raises(TrainingError, match="epoch"):
        train(toy_corpus(), hyperparams={"learning_rate": float("inf")})


def test_zero_model_scores_half():
    m = ClassifierModel.zeros()
    assert score(m, "anything at all") == 0.5


@given(st.floats(-20, 20), st.floats(0, 5))
def test_score_monotone_in_bias(b, delta):
    w = np.zeros(2**18)
    lo = ClassifierModel(w, b)
    hi = ClassifierModel(w, b + delta)
    assert score(hi, "felt it") >= score(lo, "felt it")


def test_threshold_edges():
    msgs = [RawMessage(f"m{i}", "u", 1, t, None, None, None) for i, t in enumerate(["a", "b c", ""])]
    assert filter_relevant(ClassifierModel.zeros(threshold=0.0), msgs) == msgs
    m = ClassifierModel.zeros(threshold=1.5)
    assert m.threshold == 1.0
    m.bias = 1000.0  # score == 1.0 exactly
    assert filter_relevant(m, msgs) == msgs
    with pytest.raises(ValueError):
        filter_relevant(ClassifierModel.zeros("damage_info"), msgs)


def test_damage_examples(models):
    pres, info = models["damage_presence"], models["damage_info"]
    assert classify_damage(pres, info, "buildings collapsed, people hurt") == "present"
    assert classify_damage(pres, info, "we are all fine, no damage here") == "absent_reported"
    assert classify_damage(pres, info, "") == "no_info"


def test_auc_examples():
    assert auc([0.9, 0.8, 0.3], [1, 0, 1]) == 0.5
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc([0.5] * 6, [1, 0, 1, 0, 1, 0]) == 0.5
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])


@given(st.lists(st.tuples(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]) | st.floats(0, 1), st.booleans()),
                min_size=2, max_size=40).filter(lambda xs: 0 < sum(y for _, y in xs) < len(xs)))
def test_auc_matches_pairwise(pairs):
    s, y = zip(*pairs)
    assert abs(auc(s, y) - pairwise_auc(s, y)) < 1e-9


def test_model_round_trip(tmp_path):
    m = train(toy_corpus(60))
    p = tmp_path / "m.json"
    m.save(p)
    m2 = ClassifierModel.load(p)
    assert np.array_equal(m.weights, m2.weights)
    assert (m.bias, m.threshold, m.task) == (m2.bias, m2.threshold, m2.task)


def test_corpus_io(tmp_path):
    p = tmp_path / "c.jsonl"
    write_corpus(toy_corpus(10), p)
    assert load_corpus(p) == toy_corpus(10)
    p.write_text('{"text": "x"}\n')
    with pytest.raises(DatasetError, match=":1:"):
        load_corpus(p)


def test_training_is_deterministic():
    a, b = train(toy_corpus(80), seed=4), train(toy_corpus(80), seed=4)
    assert np.array_equal(a.weights, b.weights) and a.threshold == b.threshold
