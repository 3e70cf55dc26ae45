"""Deterministic discrete-event simulation of an OSN population around an earthquake."""
import heapq
import itertools
import json
import math
import random
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import templates as T
from .dispatch import Question, Reply
from .geo import EARTH_RADIUS_KM, haversine_km
from .geoparse import GRANULARITIES

DAMAGE_LABELS = ("present", "absent_reported", "no_info")


class DeliveryError(LookupError):
    pass


def felt_radius(magnitude, r0=0.5, c=0.45):
    """Radius (km) within which an event of this magnitude is assumed to be felt."""
    if r0 <= 0 or c <= 0:
        raise ValueError("felt radius parameters must be positive")
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    return r0 * 10 ** (c * magnitude)


def substream_seed(seed, name):
    """Independent seed for a named random stream derived from the scenario seed."""
    ss = np.random.SeedSequence([seed % (2 ** 63), zlib.crc32(name.encode())])
    lo, hi = (int(x) for x in ss.generate_state(2, dtype=np.uint32))
    return lo | hi << 32


def stream_numpy(seed, name):
    return np.random.default_rng(substream_seed(seed, name))


def stream_random(seed, name):
    return random.Random(substream_seed(seed, name))


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    home_lat: float
    home_lon: float
    is_witness: bool
    geotag_enabled: bool
    collaboration_prob: float
    reply_prob: float
    account_age_days: int = 365


@dataclass(frozen=True)
class GroundTruth:
    relevant: bool
    witness: bool = False
    damage: str = "no_info"
    mentioned_place_ids: tuple = ()
    collaborative: Optional[bool] = None

    def to_dict(self):
        return {"relevant": self.relevant, "witness": self.witness, "damage": self.damage,
                "mentioned_place_ids": list(self.mentioned_place_ids), "collaborative": self.collaborative}

    @classmethod
    def from_dict(cls, d):
        return cls(d["relevant"], d["witness"], d["damage"], tuple(d["mentioned_place_ids"]), d["collaborative"])


@dataclass(frozen=True)
class RawMessage:
    msg_id: str
    author_id: str
    timestamp: int
    text: str
    geotag: Optional[tuple] = None
    in_reply_to: Optional[str] = None
    truth: GroundTruth = field(default_factory=lambda: GroundTruth(False))

    def to_dict(self):
        return {
            "msg_id": self.msg_id,
            "author_id": self.author_id,
            "ts": self.timestamp,
            "text": self.text,
            "geo": None if self.geotag is None else {"lat": self.geotag[0], "lon": self.geotag[1]},
            "in_reply_to": self.in_reply_to,
            "truth": self.truth.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        geo = d.get("geo")
        return cls(d["msg_id"], d["author_id"], d["ts"], d["text"],
                   None if geo is None else (geo["lat"], geo["lon"]),
                   d.get("in_reply_to"), GroundTruth.from_dict(d["truth"]))


def write_jsonl(messages, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for m in messages:
            fh.write(json.dumps(m.to_dict(), ensure_ascii=False) + "\n")


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [RawMessage.from_dict(json.loads(line)) for line in fh if line.strip()]


def _destinations(lat, lon, bearings_deg, dists_km):
    d = np.asarray(dists_km) / EARTH_RADIUS_KM
    b = np.radians(bearings_deg)
    p1 = math.radians(lat)
    p2 = np.arcsin(np.sin(p1) * np.cos(d) + np.cos(p1) * np.sin(d) * np.cos(b))
    l2 = math.radians(lon) + np.arctan2(np.sin(b) * np.sin(d) * np.cos(p1), np.cos(d) - np.sin(p1) * np.sin(p2))
    return np.degrees(p2), (np.degrees(l2) + 540.0) % 360.0 - 180.0


def generate_population(config, event, rng_seed):
    n = config.population
    if n == 0:
        return []
    rng = stream_numpy(rng_seed, "population")
    radius = felt_radius(event.magnitude, config.felt_radius.r0, config.felt_radius.c)
    spread = max(config.layout.spread_km, radius)
    local = rng.random(n) < config.layout.local_fraction
    u = rng.random(n)
    dist = np.where(local, 0.999 * radius * np.sqrt(u),
                    np.sqrt(radius ** 2 + u * (spread ** 2 - radius ** 2)))
    bearing = rng.random(n) * 360.0
    lats, lons = _destinations(event.epicenter_lat, event.epicenter_lon, bearing, dist)
    geotag = rng.random(n) < config.probabilities.p_geotag
    age = rng.integers(1, 4000, n)
    pc = float(config.probabilities.p_collaborative)
    pr = float(config.probabilities.p_reply)
    out = []
    for i in range(n):
        lat, lon = float(lats[i]), float(lons[i])
        witness = haversine_km(lat, lon, event.epicenter_lat, event.epicenter_lon) <= radius
        out.append(UserProfile(f"u{i:07d}", lat, lon, bool(witness), bool(geotag[i]), pc, pr, int(age[i])))
    return out


class PlaceSampler:
    """Draws place mentions near the epicenter by granularity level."""

    def __init__(self, gazetteer, event, radius_km):
        near = [e for e in gazetteer
                if haversine_km(e.lat, e.lon, event.epicenter_lat, event.epicenter_lon) <= radius_km]
        ids = {e.place_id for e in near}
        for e in near:
            ids.update(gazetteer.parent_chain(e.place_id))
        self.by_level = {g: [] for g in GRANULARITIES}
        for pid in sorted(ids):
            e = gazetteer[pid]
            self.by_level[e.granularity].append(e)
        self.pop_weights = {g: list(itertools.accumulate(math.log(e.population + 2) for e in es))
                            for g, es in self.by_level.items()}

    def draw(self, rng, weights, population_weighted):
        levels = [g for g in GRANULARITIES if self.by_level[g] and weights.get(g, 0) > 0]
        if not levels:
            levels = [g for g in GRANULARITIES if self.by_level[g]]
            if not levels:
                return None
            level = levels[rng.randrange(len(levels))]
        else:
            level = rng.choices(levels, weights=[weights[g] for g in levels])[0]
        pool = self.by_level[level]
        if population_weighted:
            return rng.choices(pool, cum_weights=self.pop_weights[level])[0]
        return pool[rng.randrange(len(pool))]


def _binomial(rng, n, p):
    return sum(rng.random() < p for _ in range(n))


def _spontaneous_count(rng, mean):
    if mean <= 0:
        return 0
    n = max(2, math.ceil(2 * mean))
    return _binomial(rng, n, mean / n)


class OSNWorld:
    def __init__(self, config, event, gazetteer, seed=None, profiles=None):
        self.config = config
        self.event = event
        self.seed = config.seed if seed is None else seed
        self.profiles = generate_population(config, event, self.seed) if profiles is None else profiles
        self.users = {p.user_id: p for p in self.profiles}
        self.places = PlaceSampler(gazetteer, event, config.posting.place_radius_km)
        self.now = event.origin_time
        self.questions = {}
        self.orphans = []
        self.late_replies = 0
        self._queue = []
        self._seq = itertools.count()
        self._msg_ids = itertools.count()
        self._reply_ids = itertools.count()
        self._text_rng = stream_random(self.seed, "text")
        self._reply_rng = stream_random(self.seed, "replies")

    # -- scheduling -------------------------------------------------------
    def schedule(self, ts, kind, payload):
        heapq.heappush(self._queue, (ts, next(self._seq), kind, payload))

    def _pop_until(self, horizon, kind):
        out = []
        while self._queue and self._queue[0][0] <= horizon and self._queue[0][2] == kind:
            ts, _, _, payload = heapq.heappop(self._queue)
            self.now = max(self.now, ts)
            out.append((ts, payload))
        return out

    # -- text rendering ---------------------------------------------------
    def _places(self, rng, k, weights, population_weighted):
        picked = [self.places.draw(rng, weights, population_weighted) for _ in range(k)]
        return [p for p in picked if p is not None]

    def _render(self, rng, skeleton, places):
        names = [p.name for p in places]
        where = " in " + T.render_places(names) if names else ""
        text = T.garble(skeleton, rng, self.config.posting.noise, tuple(self.config.keywords))
        return text.format(where=where, places=T.render_places(names),
                           mag=f"{self.event.magnitude:.1f}")

    def _damage_label(self, probs):
        u = self._text_rng.random()
        if u < probs.get("present", 0):
            return "present"
        if u < probs.get("present", 0) + probs.get("absent_reported", 0):
            return "absent_reported"
        return "no_info"

    def _render_post(self, author, category):
        rng = self._text_rng
        po = self.config.posting
        k = _spontaneous_count(rng, po.place_mean)
        places = self._places(rng, k, self.config.enrichment.spontaneous_granularity, True)
        relevant = witness = False
        damage = "no_info"
        if category == "relevant":
            relevant = True
            witness = author.is_witness
            if witness:
                damage = self._damage_label(po.witness_damage)
                skeleton = rng.choice(T.WITNESS[damage])
            else:
                damage = self._damage_label(po.news_damage)
                skeleton = rng.choice(T.NEWS[damage])
        elif category == "offtopic":
            skeleton = rng.choice(T.OFFTOPIC)
        else:
            skeleton = rng.choice(T.CHATTER)
        if "{where}" not in skeleton:
            places = []
        text = self._render(rng, skeleton, places)
        truth = GroundTruth(relevant, witness, damage, tuple(p.place_id for p in places))
        return text, truth

    def _geotag(self, author, rng):
        if not author.geotag_enabled:
            return None
        return (round(author.home_lat + rng.uniform(-0.01, 0.01), 6),
                round(author.home_lon + rng.uniform(-0.01, 0.01), 6))

    # -- opportunistic stream ---------------------------------------------
    def plan_posts(self, time_window_ms):
        """Push one 'post' event per spontaneous message onto the queue."""
        rng = stream_numpy(self.seed, "posting")
        n = len(self.profiles)
        if n == 0:
            return 0
        po = self.config.posting
        posters = np.flatnonzero(rng.random(n) < self.config.probabilities.p_post)
        counts = 1 + rng.poisson(po.extra_posts, len(posters))
        authors = np.repeat(posters, counts)
        m = len(authors)
        cats = ("relevant", "offtopic", "chatter")
        w = np.array([po.mix.get(c, 0.0) for c in cats], dtype=float)
        cat_idx = rng.choice(3, size=m, p=w / w.sum())
        window_s = time_window_ms / 1000.0
        delay = rng.exponential(max(window_s, 1e-9) / 4.0, m)
        late = delay > window_s
        delay[late] = rng.uniform(0, window_s, int(late.sum()))
        ts = self.event.origin_time + np.floor(delay * 1000).astype(np.int64)
        for a, c, t in zip(authors.tolist(), cat_idx.tolist(), ts.tolist()):
            self.schedule(t, "post", (a, cats[c]))
        return m

    def drain_posts(self, until_ms):
        out = []
        for ts, (author_idx, category) in self._pop_until(until_ms, "post"):
            author = self.profiles[author_idx]
            text, truth = self._render_post(author, category)
            out.append(RawMessage(f"m{next(self._msg_ids):07d}", author.user_id, ts, text,
                                  self._geotag(author, self._text_rng), None, truth))
        return out

    # -- participatory phase ------------------------------------------------
    def _render_reply(self, rng, user, kind, collaborative):
        po = self.config.posting
        if kind == "ask_geo":
            if not collaborative:
                return rng.choice(T.REPLY_GEO["uncollaborative"]), GroundTruth(True, user.is_witness, "no_info", (), False)
            pc = max(user.collaboration_prob, 1e-9)
            extra = max(0.0, self.config.enrichment.density_factor * po.place_mean / pc - 1.0)
            n = max(1, math.ceil(2 * extra))
            k = 1 + _binomial(rng, n, extra / n) if extra > 0 else 1
            places = self._places(rng, k, self.config.enrichment.reply_granularity, False)
            text = self._render(rng, rng.choice(T.REPLY_GEO["collaborative"]), places)
            return text, GroundTruth(True, user.is_witness, "no_info", tuple(p.place_id for p in places), True)
        if not collaborative:
            damage = "no_info"
        elif user.is_witness and rng.random() < po.reply_damage_present:
            damage = "present"
        else:
            damage = "absent_reported"
        skeleton = rng.choice(T.REPLY_DAMAGE[damage])
        places = []
        if "{where}" in skeleton:
            places = self._places(rng, _spontaneous_count(rng, po.place_mean),
                                  self.config.enrichment.spontaneous_granularity, True)
        text = self._render(rng, skeleton, places)
        return text, GroundTruth(True, user.is_witness, damage, tuple(p.place_id for p in places), collaborative)

    def deliver_question(self, question, rng=None):
        return deliver_question(self, question, rng)


def simulate_stream(world, event, time_window):
    """All spontaneous messages posted within time_window ms of the origin, in time order."""
    world.plan_posts(time_window)
    return world.drain_posts(event.origin_time + time_window)


def deliver_question(world, question, rng=None):
    user = world.users.get(question.target_user)
    if user is None:
        raise DeliveryError(f"unknown target user {question.target_user!r}")
    world.questions[question.question_id] = question
    rng = world._reply_rng if rng is None else rng
    if rng.random() >= user.reply_prob:
        return None
    lat = world.config.latency
    dt_min = rng.lognormvariate(lat.mu_log, lat.sigma_log)
    dt_ms = max(1, round(dt_min * 60000))
    collaborative = rng.random() < user.collaboration_prob
    text, truth = world._render_reply(rng, user, question.kind, collaborative)
    msg = RawMessage(f"r{next(world._reply_ids):07d}", user.user_id, question.sent_time + dt_ms, text,
                     world._geotag(user, rng), question.question_id, truth)
    world.schedule(msg.timestamp, "reply", msg)
    return Reply(msg.msg_id, question.question_id, dt_ms / 60000.0, question.kind, collaborative, msg)


def collect_replies(world, horizon):
    """Pop every reply that arrived by the absolute time horizon (epoch ms)."""
    out = []
    for ts, msg in world._pop_until(horizon, "reply"):
        q = world.questions.get(msg.in_reply_to)
        if q is None:
            world.orphans.append(msg.msg_id)
            continue
        out.append(Reply(msg.msg_id, q.question_id, (msg.timestamp - q.sent_time) / 60000.0, q.kind,
                         bool(msg.truth.collaborative), msg))
    world.late_replies = sum(1 for item in world._queue if item[2] == "reply")
    return out
