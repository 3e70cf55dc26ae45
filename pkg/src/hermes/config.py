"""Scenario configuration: strict JSON loading and validation."""
import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from . import data_path
from .feed import EarthquakeEvent, FeedValidationError, load_feed
from .geoparse import GRANULARITIES
from .templates import DEFAULT_KEYWORDS


class ConfigError(ValueError):
    pass


@dataclass
class FeltRadius:
    r0: float = 0.5
    c: float = 0.45


@dataclass
class Layout:
    local_fraction: float = 0.3   # share of users placed inside the felt radius
    spread_km: float = 400.0      # everyone else lives in the annulus up to this distance


@dataclass
class Probabilities:
    p_post: float = 0.5
    p_geotag: float = 0.02
    p_reply: float = 0.5
    p_collaborative: float = 0.85


@dataclass
class Posting:
    extra_posts: float = 0.5
    time_window_s: float = 3600.0
    mix: dict = field(default_factory=lambda: {"relevant": 0.4, "offtopic": 0.5, "chatter": 0.1})
    noise: float = 0.05
    witness_damage: dict = field(default_factory=lambda: {"present": 0.05, "absent_reported": 0.15})
    news_damage: dict = field(default_factory=lambda: {"present": 0.05, "absent_reported": 0.05})
    reply_damage_present: float = 0.1
    place_mean: float = 0.5
    place_radius_km: float = 150.0


@dataclass
class Latency:
    mu_log: float = 2.0       # log-minutes
    sigma_log: float = 0.5


@dataclass
class Collection:
    match_geotagged_in_radius: bool = False
    radius_km: float = 50.0
    crawl_limit: Optional[int] = None
    crawl_window_s: float = 60.0


@dataclass
class Bots:
    count: int = 4
    max_sends: int = 50
    window_s: float = 900.0


@dataclass
class Dispatch:
    staleness_s: float = 7200.0
    reply_horizon_s: float = 6 * 3600.0
    ledger_scope: str = "campaign"


@dataclass
class Classifiers:
    relevance: Optional[str] = None
    damage_presence: Optional[str] = None
    damage_info: Optional[str] = None
    witness_weights: Optional[str] = None
    thresholds: dict = field(default_factory=dict)


def _default_spont_gran():
    return {"building": 0.05, "city": 0.45, "region": 0.1, "country": 0.3, "other": 0.1}


def _default_reply_gran():
    return {"building": 0.2, "city": 0.5, "region": 0.2, "country": 0.08, "other": 0.02}


@dataclass
class Enrichment:
    density_factor: float = 3.0
    spontaneous_granularity: dict = field(default_factory=_default_spont_gran)
    reply_granularity: dict = field(default_factory=_default_reply_gran)


@dataclass
class ScenarioConfig:
    seed: int
    event: EarthquakeEvent
    name: str = "scenario"
    min_magnitude: float = 3.0
    population: int = 10000
    felt_radius: FeltRadius = field(default_factory=FeltRadius)
    layout: Layout = field(default_factory=Layout)
    probabilities: Probabilities = field(default_factory=Probabilities)
    posting: Posting = field(default_factory=Posting)
    latency: Latency = field(default_factory=Latency)
    keywords: list = field(default_factory=lambda: list(DEFAULT_KEYWORDS))
    collection: Collection = field(default_factory=Collection)
    bots: Bots = field(default_factory=Bots)
    contact_budget: int = 300
    dispatch: Dispatch = field(default_factory=Dispatch)
    classifiers: Classifiers = field(default_factory=Classifiers)
    gazetteer: Optional[str] = None
    enrichment: Enrichment = field(default_factory=Enrichment)
    grid_cell_deg: float = 0.5
    variety_mode: str = "per_message"
    mode: str = "simulation"

    def validate(self):
        _validate(self)
        return self

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["event"] = self.event.to_dict()
        return d

    def resolve_path(self, value, default_name):
        return value if value is not None else data_path(default_name)


_NESTED = {
    "felt_radius": FeltRadius, "layout": Layout, "probabilities": Probabilities, "posting": Posting,
    "latency": Latency, "collection": Collection, "bots": Bots, "dispatch": Dispatch,
    "classifiers": Classifiers, "enrichment": Enrichment,
}


def _build(cls, raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    return cls(**raw)


def _check_prob(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 <= v <= 1:
        raise ConfigError(f"{where} must be a probability in [0, 1], got {v!r}")


def _check_nonneg(v, where, integer=False):
    kinds = (int,) if integer else (int, float)
    if isinstance(v, bool) or not isinstance(v, kinds) or v < 0:
        raise ConfigError(f"{where} must be a non-negative {'integer' if integer else 'number'}, got {v!r}")


def _check_weights(d, keys, where):
    if not isinstance(d, dict) or set(d) - set(keys):
        raise ConfigError(f"{where}: keys must be among {list(keys)}")
    for k, v in d.items():
        _check_nonneg(v, f"{where}.{k}")


def _validate(c):
    if isinstance(c.seed, bool) or not isinstance(c.seed, int):
        raise ConfigError("seed must be an integer")
    _check_nonneg(c.population, "population", integer=True)
    _check_nonneg(c.contact_budget, "contact_budget", integer=True)
    p = c.probabilities
    for k in ("p_post", "p_geotag", "p_reply", "p_collaborative"):
        _check_prob(getattr(p, k), f"probabilities.{k}")
    if c.felt_radius.r0 <= 0 or c.felt_radius.c <= 0:
        raise ConfigError("felt_radius.r0 and felt_radius.c must be positive")
    _check_prob(c.layout.local_fraction, "layout.local_fraction")
    _check_nonneg(c.layout.spread_km, "layout.spread_km")
    po = c.posting
    _check_nonneg(po.extra_posts, "posting.extra_posts")
    _check_nonneg(po.time_window_s, "posting.time_window_s")
    _check_weights(po.mix, ("relevant", "offtopic", "chatter"), "posting.mix")
    if sum(po.mix.values()) <= 0:
        raise ConfigError("posting.mix must have positive total weight")
    _check_prob(po.noise, "posting.noise")
    for name in ("witness_damage", "news_damage"):
        d = getattr(po, name)
        _check_weights(d, ("present", "absent_reported"), f"posting.{name}")
        for k, v in d.items():
            _check_prob(v, f"posting.{name}.{k}")
        if sum(d.values()) > 1:
            raise ConfigError(f"posting.{name} probabilities sum above 1")
    _check_prob(po.reply_damage_present, "posting.reply_damage_present")
    _check_nonneg(po.place_mean, "posting.place_mean")
    _check_nonneg(po.place_radius_km, "posting.place_radius_km")
    if c.latency.sigma_log < 0:
        raise ConfigError("latency.sigma_log must be >= 0")
    if not c.keywords or not all(isinstance(k, str) and k.strip() for k in c.keywords):
        raise ConfigError("keywords must be a non-empty list of non-empty strings")
    co = c.collection
    if co.crawl_limit is not None:
        _check_nonneg(co.crawl_limit, "collection.crawl_limit", integer=True)
    if co.crawl_window_s <= 0:
        raise ConfigError("collection.crawl_window_s must be positive")
    b = c.bots
    _check_nonneg(b.count, "bots.count", integer=True)
    _check_nonneg(b.max_sends, "bots.max_sends", integer=True)
    if b.window_s <= 0 or b.max_sends == 0:
        raise ConfigError("bots.window_s and bots.max_sends must be positive")
    d = c.dispatch
    _check_nonneg(d.staleness_s, "dispatch.staleness_s")
    _check_nonneg(d.reply_horizon_s, "dispatch.reply_horizon_s")
    if d.ledger_scope not in ("campaign", "event"):
        raise ConfigError("dispatch.ledger_scope must be 'campaign' or 'event'")
    for task, t in c.classifiers.thresholds.items():
        if task not in ("relevance", "damage_presence", "damage_info"):
            raise ConfigError(f"classifiers.thresholds: unknown task {task!r}")
        _check_prob(t, f"classifiers.thresholds.{task}")
    e = c.enrichment
    if e.density_factor <= 0:
        raise ConfigError("enrichment.density_factor must be positive")
    _check_weights(e.spontaneous_granularity, GRANULARITIES, "enrichment.spontaneous_granularity")
    _check_weights(e.reply_granularity, GRANULARITIES, "enrichment.reply_granularity")
    if c.grid_cell_deg <= 0:
        raise ConfigError("grid_cell_deg must be positive")
    if c.variety_mode not in ("per_message", "event_level"):
        raise ConfigError("variety_mode must be 'per_message' or 'event_level'")
    if c.mode not in ("simulation", "evaluation"):
        raise ConfigError("mode must be 'simulation' or 'evaluation'")


def _resolve_event(raw, base_dir):
    if isinstance(raw, dict) and "feed" in raw:
        extra = set(raw) - {"feed", "event_id"}
        if extra:
            raise ConfigError(f"event: unknown keys {sorted(extra)}")
        path = raw["feed"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        try:
            events = load_feed(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"event feed: {exc}") from None
        if raw.get("event_id") is None:
            if not events:
                raise ConfigError("event feed is empty")
            return events[0]
        for ev in events:
            if ev.event_id == raw["event_id"]:
                return ev
        raise ConfigError(f"event {raw['event_id']!r} not in feed")
    if isinstance(raw, dict):
        allowed = {f.name for f in dataclasses.fields(EarthquakeEvent)}
        extra = set(raw) - allowed
        if extra:
            raise ConfigError(f"event: unknown keys {sorted(extra)}")
        try:
            return EarthquakeEvent.from_dict(raw)
        except (KeyError, FeedValidationError, TypeError) as exc:
            raise ConfigError(f"event: {exc}") from None
    raise ConfigError("event must be an object")


def config_from_dict(raw, base_dir="."):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "seed" not in raw:
        raise ConfigError("seed is required")
    if "event" not in raw:
        raise ConfigError("event is required")
    raw = dict(raw)
    kwargs = {}
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}")
    kwargs["event"] = _resolve_event(raw.pop("event"), base_dir)
    for key, value in raw.items():
        if key in _NESTED:
            try:
                kwargs[key] = _build(_NESTED[key], value, key)
            except TypeError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        else:
            kwargs[key] = value
    cfg = ScenarioConfig(**kwargs)
    # file paths are relative to the config file
    for attr in ("relevance", "damage_presence", "damage_info", "witness_weights"):
        v = getattr(cfg.classifiers, attr)
        if v is not None and not os.path.isabs(v):
            setattr(cfg.classifiers, attr, os.path.join(base_dir, v))
    if cfg.gazetteer is not None and not os.path.isabs(cfg.gazetteer):
        cfg.gazetteer = os.path.join(base_dir, cfg.gazetteer)
    return cfg.validate()


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, os.path.dirname(os.path.abspath(path)))


def bundled_scenario(name):
    return load_config(data_path("scenarios", name + ".json"))
