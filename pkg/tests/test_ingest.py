import pytest
from hypothesis import given, strategies as st

from hermes.geo import destination
from hermes.ingest import CollectionFilter, CollectStats, collect, match
from hermes.world import RawMessage
from conftest import make_event

EV = make_event()


def msg(text, ts=0, geo=None, mid=None):
    return RawMessage(mid or f"m{ts}-{text[:5]}", "u", ts, text, geo, None, None)


def test_match_examples():
    flt = CollectionFilter(("earthquake",))
    assert match(msg("Felt an EARTHQUAKE just now"), flt, EV)
    assert not match(msg("quakes"), CollectionFilter(("quake",)), EV)
    assert match(msg("a quake!"), CollectionFilter(("quake",)), EV)
    assert not match(msg("earthquakefan"), flt, EV)
    # underscores separate tokens, as in the tokenizer
    assert match(msg("earthquake_fan"), flt, EV)


def test_geotag_in_radius():
    near = destination(EV.epicenter_lat, EV.epicenter_lon, 90, 5)
    far = destination(EV.epicenter_lat, EV.epicenter_lon, 90, 80)
    flt = CollectionFilter(("earthquake",), True, 50.0)
    assert match(msg("lovely day", geo=near), flt, EV)
    assert not match(msg("lovely day", geo=far), flt, EV)
    assert not match(msg("lovely day", geo=near), CollectionFilter(("earthquake",)), EV)


def test_filter_needs_something():
    with pytest.raises(ValueError):
        CollectionFilter(())
    with pytest.raises(ValueError):
        CollectionFilter(("  ",))


def test_collect_counts():
    flt = CollectionFilter()
    stream = [msg("earthquake", ts=i, mid=f"m{i}") for i in range(2266)]
    assert len(collect(stream, flt, EV)) == 2266
    assert collect([], flt, EV) == []


def test_crawl_limit_window():
    flt = CollectionFilter()
    stream = [msg("quake", ts=i * 10, mid=f"m{i}") for i in range(100)]
    stats = CollectStats()
    out = collect(stream, flt, EV, crawl_limit=60, window_ms=60_000, stats=stats)
    assert len(out) == 60 and stats.dropped == 40
    assert out == stream[:60]


def test_duplicates_collapsed():
    stats = CollectStats()
    m = msg("quake", mid="same")
    assert collect([m, m], CollectionFilter(), EV, stats=stats) == [m]
    assert stats.duplicates == 1


timestamps = st.lists(st.integers(0, 5000), max_size=80).map(sorted)


@given(timestamps, st.integers(1, 10), st.integers(1, 1000))
def test_collect_properties(ts, limit, window):
    stream = [msg("earthquake" if i % 3 else "nothing", ts=t, mid=f"m{i}") for i, t in enumerate(ts)]
    flt = CollectionFilter()
    out = collect(stream, flt, EV, crawl_limit=limit, window_ms=window)
    # subset, order preserved
    ids = [m.msg_id for m in stream]
    pos = [ids.index(m.msg_id) for m in out]
    assert pos == sorted(pos) and all(match(m, flt, EV) for m in out)
    # no window (t - W, t] holds more than the limit
    times = [m.timestamp for m in out]
    assert all(sum(1 for u in times if t - window < u <= t) <= limit for t in times)
    # a larger quota never collects fewer messages
    assert len(collect(stream, flt, EV, crawl_limit=limit + 1, window_ms=window)) >= len(out)
    assert len(collect(stream, flt, EV)) >= len(out)
