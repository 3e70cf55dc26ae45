import pytest

from hermes import data_path
from hermes.config import config_from_dict
from hermes.feed import EarthquakeEvent
from hermes.geoparse import Gazetteer, GazetteerEntry, load_gazetteer
from hermes.pipeline import load_models

ORIGIN = 1_430_000_000_000


def make_event(**kw):
    d = dict(event_id="ev1", magnitude=5.0, depth_km=10.0, epicenter_lat=37.78, epicenter_lon=-121.96,
             origin_time=ORIGIN, place_name="Test")
    d.update(kw)
    return EarthquakeEvent(**d).validate()


def make_config(**kw):
    raw = {"seed": 1, "event": make_event().to_dict(), "population": 500}
    raw.update(kw)
    return config_from_dict(raw)


def entry(pid, name, lat=0.0, lon=0.0, gran="city", pop=0, parent=None, aliases=()):
    return GazetteerEntry(pid, name, tuple(aliases), lat, lon, gran, pop, parent)


@pytest.fixture(scope="session")
def gazetteer():
    return load_gazetteer(data_path("gazetteer.tsv"))


@pytest.fixture(scope="session")
def models():
    return load_models(make_config())


@pytest.fixture(scope="session")
def tiny_gazetteer():
    return Gazetteer([
        entry("us", "United States", 39.8, -98.6, "country", 330_000_000, aliases=("USA",)),
        entry("ca", "California", 36.8, -119.4, "region", 39_000_000, "us"),
        entry("sr", "San Ramon", 37.78, -121.98, "city", 84_000, "ca"),
        entry("sf", "San Francisco", 37.77, -122.42, "city", 870_000, "ca", aliases=("SF",)),
        entry("sr_hs", "San Ramon Valley High School", 37.82, -121.99, "building", 0, "sr"),
        entry("spr_a", "Springfield", 39.78, -89.65, "city", 114_000, "us"),
        entry("spr_b", "Springfield", 37.21, -93.29, "city", 167_000, "us"),
    ]).validate()
