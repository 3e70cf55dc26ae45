import numpy as np
from hypothesis import given, strategies as st

from hermes import templates as T
from hermes.geoparse import geoparse
from hermes.witness import (FEATURE_NAMES, LinearScorer, WitnessFeatures, extract_witness_features,
                            select_candidates, witness_score)
from hermes.world import RawMessage


def msg(text, mid="m", user="u", ts=1, geo=None):
    return RawMessage(mid, user, ts, text, geo, None, None)


def test_linguistic_features():
    f = extract_witness_features(msg("I felt it! So scary!!"))
    assert f.first_person_rate > 0 and f.exclamation_rate > 0 and f.sentiment < 0
    e = extract_witness_features(msg(""))
    assert (e.first_person_rate, e.exclamation_rate, e.token_count, e.lexicon_similarity, e.sentiment,
            e.entity_count) == (0, 0, 0, 0, 0, 0)


def test_entity_proxy_counts_places(gazetteer):
    text = "shaking in Kathmandu and Pokhara"
    f = extract_witness_features(msg(text), gazetteer)
    assert f.entity_count == len(geoparse(text, gazetteer)) == 2


def test_metadata_features():
    f = extract_witness_features(msg("x", geo=(1.0, 2.0)), account_age_days=400)
    assert f.geotag == 1.0 and f.account_age_bucket == 2.0


def test_zero_weights_score_zero():
    z = LinearScorer({})
    assert witness_score(z, extract_witness_features(msg("I felt it!"))) == 0.0


vec = st.lists(st.floats(-100, 100), min_size=len(FEATURE_NAMES), max_size=len(FEATURE_NAMES))


@given(vec, vec, vec, st.floats(-10, 10))
def test_score_is_linear(w, a, b, bias):
    m = LinearScorer(dict(zip(FEATURE_NAMES, w)), bias)
    fa, fb = WitnessFeatures(*a), WitnessFeatures(*b)
    lhs = witness_score(m, fa + fb)
    rhs = witness_score(m, fa) + witness_score(m, fb) - bias
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs) + abs(rhs) + np.abs(w).sum() * 300)


def test_witness_templates_outrank_offtopic():
    scorer = LinearScorer.load()

    def s(text):
        return witness_score(scorer, extract_witness_features(msg(text), None, 400))

    wit = [k.format(where="", places="", mag="5.0") for v in T.WITNESS.values() for k in v]
    off = [k.format(where="", places="", mag="5.0") for k in T.OFFTOPIC]
    wins = [s(a) > s(b) for a in wit for b in off]
    assert sum(wins) / len(wins) >= 0.95


def test_scorer_json_round_trip():
    m = LinearScorer({"geotag": 2.0}, -1.0)
    import json
    assert LinearScorer.from_dict(json.loads(m.to_json())).vector().tolist() == m.vector().tolist()


def test_select_examples():
    scored = [(msg("a", "m1", "u1"), 0.9), (msg("b", "m2", "u1"), 0.5), (msg("c", "m3", "u2"), 0.7),
              (msg("d", "m4", "u3", geo=(1, 1)), 0.8), (msg("e", "m5", "u3"), 0.1)]
    assert select_candidates(scored, 0) == []
    got = select_candidates(scored, 10)
    assert [(t.user_id, t.source_msg_id) for t in got] == [("u1", "m1"), ("u3", "m4"), ("u2", "m3")]
    assert [t.question_kind for t in got] == ["ask_geo", "ask_damage", "ask_geo"]
    assert [t.user_id for t in select_candidates(scored, 10, {"u1"})] == ["u3", "u2"]
    assert len(select_candidates(scored, 2)) == 2


@given(st.lists(st.tuples(st.integers(0, 9), st.floats(-5, 5), st.integers(0, 100)), max_size=40),
       st.integers(0, 12), st.sets(st.integers(0, 9).map(lambda i: f"u{i}")))
def test_select_properties(rows, budget, contacted):
    scored = [(msg("t", f"m{k}", f"u{u}", ts), s) for k, (u, s, ts) in enumerate(rows)]
    got = select_candidates(scored, budget, contacted)
    users = [t.user_id for t in got]
    assert len(users) == len(set(users)) <= budget
    assert not set(users) & contacted
    scores = [t.witness_score for t in got]
    assert scores == sorted(scores, reverse=True)
    eligible = {f"u{u}" for u, _, _ in rows} - contacted
    assert len(got) == min(budget, len(eligible))
    for t in got:
        assert t.witness_score == max(s for m, s in scored if m.author_id == t.user_id)
