import random

import pytest
from hypothesis import given, settings, strategies as st

from hermes.geoparse import (Gazetteer, GazetteerError, PlaceTag, geoparse, granularity_of, load_gazetteer,
                             parse_gazetteer, write_gazetteer)
from hermes.oracles import fast_as_tokens, naive_geoparse, random_text
from conftest import entry

def find(g, name, lat=None):
    hits = [e for e in g if e.name == name and (lat is None or abs(e.lat - lat) < 0.01)]
    assert len(hits) == 1, hits
    return hits[0].place_id


HEADER = "place_id\tname\taliases\tlat\tlon\tgranularity\tpopulation\tadmin_parent\n"


def test_empty_text(gazetteer):
    assert geoparse("", gazetteer) == []


def test_two_places_with_spans(gazetteer):
    text = "Kathmandu and New York"
    tags = geoparse(text, gazetteer)
    assert [(t.surface, t.span) for t in tags] == [("Kathmandu", (0, 9)), ("New York", (14, 22))]
    assert tags[0].place_id == find(gazetteer, "Kathmandu") and tags[0].granularity == "city"
    # the state outranks the city on population when there is no epicenter
    assert tags[1].place_id == find(gazetteer, "New York", 42.9)
    near_nyc = geoparse(text, gazetteer, (40.7, -74.0))
    assert near_nyc[1].place_id == find(gazetteer, "New York", 40.713)


def test_springfield_resolves_to_nearest(gazetteer):
    near_a = (39.5, -89.5)
    near_b = (37.0, -93.0)
    il, mo = find(gazetteer, "Springfield", 39.781), find(gazetteer, "Springfield", 37.209)
    assert geoparse("Springfield", gazetteer, near_a)[0].place_id == il
    assert geoparse("Springfield", gazetteer, near_b)[0].place_id == mo
    # without context the more populous one wins
    assert geoparse("Springfield", gazetteer)[0].place_id == mo


def test_tie_rule_order():
    g = Gazetteer([
        entry("b", "Twin", 0, 0, "city", 10),
        entry("a", "Twin", 0, 0, "city", 10),
        entry("c", "Twin", 0, 0, "building", 10),
        entry("d", "Twin", 0, 0, "city", 99),
    ])
    assert geoparse("Twin", g)[0].place_id == "d"          # population first
    g2 = Gazetteer([e for e in g if e.place_id != "d"])
    assert geoparse("Twin", g2)[0].place_id == "c"         # then finer granularity
    g3 = Gazetteer([e for e in g2 if e.place_id != "c"])
    assert geoparse("Twin", g3)[0].place_id == "a"         # then lowest id


def test_longest_match_wins(tiny_gazetteer):
    tags = geoparse("at San Ramon Valley High School today", tiny_gazetteer)
    assert [t.place_id for t in tags] == ["sr_hs"]
    tags = geoparse("San Ramon, San Francisco and SF", tiny_gazetteer)
    assert [t.place_id for t in tags] == ["sr", "sf", "sf"]


def test_case_and_punctuation(tiny_gazetteer):
    tags = geoparse("SAN-RAMON!!", tiny_gazetteer)
    assert tags[0].place_id == "sr" and tags[0].surface == "SAN-RAMON"


def test_no_partial_token_match(tiny_gazetteer):
    assert geoparse("Springfields and USAF", tiny_gazetteer) == []
    assert geoparse("Atlantis", tiny_gazetteer) == []


def test_empty_file():
    assert len(parse_gazetteer([])) == 0
    assert len(parse_gazetteer([HEADER])) == 0


def test_bad_latitude_reports_line():
    rows = [HEADER, "a\tA\t\t10\t10\tcity\t5\t\n", "b\tB\t\t100\t10\tcity\t5\t\n"]
    with pytest.raises(GazetteerError, match="line 3"):
        parse_gazetteer(rows)


@pytest.mark.parametrize("rows,msg", [
    (["a\tA\t\t1\t1\tcity\t5\tzz\n"], "unknown admin_parent"),
    (["a\tA\t\t1\t1\tcity\t5\tb\n", "b\tB\t\t1\t1\tregion\t5\ta\n"], "not coarser|cyclic"),
    (["a\tA\t\t1\t1\tcity\t5\t\n", "a\tB\t\t1\t1\tcity\t5\t\n"], "duplicate"),
    (["a\tA\t1\t1\tcity\t5\t\n"], "columns"),
    (["a\t!!\t\t1\t1\tcity\t5\t\n"], "alphanumeric"),
])
def test_gazetteer_errors(rows, msg):
    with pytest.raises(GazetteerError, match=msg):
        parse_gazetteer(rows)


def test_unknown_level_normalized_to_other():
    g = parse_gazetteer(["x\tX Bay\t\t1\t1\tbay\t0\t\n"])
    assert granularity_of("x", g) == "other"


def test_granularity_of(gazetteer):
    assert granularity_of(find(gazetteer, "Nepal"), gazetteer) == "country"
    with pytest.raises(KeyError):
        granularity_of("no-such-place", gazetteer)


def test_bundled_gazetteer(gazetteer):
    assert len(gazetteer) == 5000
    assert gazetteer.validate() is gazetteer
    # building -> city -> ... chain
    school = find(gazetteer, "Dublin High School")
    chain = gazetteer.parent_chain(school)
    assert chain[0] == find(gazetteer, "Dublin", 37.702)
    assert [gazetteer[p].granularity for p in chain][:2] == ["city", "region"]
    assert gazetteer[chain[-1]].granularity == "country"


def test_write_load_round_trip(tmp_path, tiny_gazetteer):
    p = tmp_path / "g.tsv"
    write_gazetteer(tiny_gazetteer, p)
    g = load_gazetteer(p)
    assert list(g) == list(tiny_gazetteer)


def test_tag_round_trip():
    t = PlaceTag("Paris", (3, 8), "paris", 48.8, 2.3, "city")
    assert PlaceTag.from_dict(t.to_dict()) == t


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_naive_scan(gazetteer, seed):
    rng = random.Random(seed)
    names = sorted({e.name for e in gazetteer})
    text = random_text(rng, names)
    ctx = (rng.uniform(-60, 60), rng.uniform(-180, 180)) if seed % 2 else None
    tags = geoparse(text, gazetteer, ctx)
    assert fast_as_tokens(text, tags) == naive_geoparse(text, gazetteer, ctx)
    for t in tags:
        assert text[t.span[0]:t.span[1]] == t.surface
    ends = [t.span for t in tags]
    assert all(a[1] <= b[0] for a, b in zip(ends, ends[1:]))


@given(st.text(max_size=60))
def test_arbitrary_text_never_crashes(tiny_gazetteer, text):
    for t in geoparse(text, tiny_gazetteer):
        assert t.place_id in tiny_gazetteer
