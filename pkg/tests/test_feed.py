import json

import pytest
from hypothesis import given, strategies as st

from hermes.feed import (EarthquakeEvent, FeedParseError, FeedValidationError, load_feed, parse_usgs_feed,
                         should_trigger, to_usgs_feed)
from hermes import data_path


def feature(fid="us1", mag=7.5, depth=12.0, lat=28.23, lon=84.73, place="Lamjung, Nepal", **extra):
    f = {"type": "Feature", "id": fid,
         "properties": {"mag": mag, "time": 1429942260000, "place": place},
         "geometry": {"type": "Point", "coordinates": [lon, lat, depth]}}
    f.update(extra)
    return f


def doc(*feats):
    return {"type": "FeatureCollection", "features": list(feats)}


def test_lamjung_feature():
    (ev,) = parse_usgs_feed(json.dumps(doc(feature())))
    assert ev.magnitude == 7.5 and ev.depth_km == 12.0
    assert ev.place_name == "Lamjung, Nepal"
    assert (ev.epicenter_lat, ev.epicenter_lon) == (28.23, 84.73)


def test_empty_collection():
    assert parse_usgs_feed(doc()) == []


def test_latitude_out_of_range():
    with pytest.raises(FeedValidationError, match="feature 0"):
        parse_usgs_feed(doc(feature(lat=95)))


def test_errors_name_the_feature():
    with pytest.raises(FeedParseError, match="feature 1"):
        parse_usgs_feed(doc(feature(), {"id": "x", "properties": {}}))
    with pytest.raises(FeedValidationError, match="duplicate"):
        parse_usgs_feed(doc(feature(), feature()))
    with pytest.raises(FeedParseError):
        parse_usgs_feed("{not json")
    with pytest.raises(FeedParseError):
        parse_usgs_feed({"type": "FeatureCollection"})


def test_unknown_fields_ignored_and_bytes_accepted():
    f = feature(bbox=[1, 2, 3])
    f["properties"]["felt"] = 12
    (ev,) = parse_usgs_feed(json.dumps(doc(f)).encode())
    assert ev.event_id == "us1"


@pytest.mark.parametrize("mag,ok", [(3.3, True), (2.9, False), (3.0, True)])
def test_trigger_threshold(mag, ok):
    ev = EarthquakeEvent("e", mag, 5.0, 0.0, 0.0, 1)
    assert should_trigger(ev, 3.0) is ok


def test_bundled_feed_has_five_events():
    events = load_feed(data_path("feeds", "events.json"))
    assert [e.magnitude for e in events] == [3.5, 4.8, 7.5, 7.7, 3.3]
    assert [e.depth_km for e in events] == [11.0, 81.0, 12.0, 66.0, 6.0]


events_st = st.builds(
    EarthquakeEvent,
    event_id=st.text(st.characters(min_codepoint=48, max_codepoint=122), min_size=1, max_size=8),
    magnitude=st.floats(0, 10),
    depth_km=st.floats(0, 700),
    epicenter_lat=st.floats(-90, 90),
    epicenter_lon=st.floats(-180, 180),
    origin_time=st.integers(1, 2**42),
    place_name=st.text(max_size=20),
)


@given(st.lists(events_st, max_size=6, unique_by=lambda e: e.event_id))
def test_feed_round_trip(events):
    assert parse_usgs_feed(json.dumps(to_usgs_feed(events))) == events


@given(events_st, st.floats(0, 10), st.floats(0, 10))
def test_trigger_monotone_in_threshold(ev, a, b):
    lo, hi = sorted((a, b))
    assert should_trigger(ev, hi) <= should_trigger(ev, lo)
