"""Event-level measures, significance tests, crisis map and the per-event report."""
import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction

import numpy as np
from scipy.special import betainc

from .feed import EarthquakeEvent
from .geoparse import GRANULARITIES, GRANULARITY_RANK, PlaceTag


class UndefinedMetric(ValueError):
    pass


class SignificanceTestError(ValueError):
    pass


# -- counting measures -------------------------------------------------------

def message_gain(n_replies, n_relevant):
    if n_relevant <= 0:
        raise UndefinedMetric("no relevant messages")
    return n_replies / n_relevant


def collaborative_rate(flags):
    flags = list(flags)
    if not flags:
        raise UndefinedMetric("no replies")
    return sum(bool(f) for f in flags) / len(flags)


def mean_reply_latency(delta_ts):
    delta_ts = list(delta_ts)
    if not delta_ts:
        raise UndefinedMetric("no replies")
    return math.fsum(delta_ts) / len(delta_ts)


def damage_ratio(labels):
    labels = list(labels)
    if not labels:
        raise UndefinedMetric("empty message set")
    return sum(lab == "present" for lab in labels) / len(labels)


def damage_info_ratio(labels):
    labels = list(labels)
    if not labels:
        raise UndefinedMetric("empty message set")
    return sum(lab in ("present", "absent_reported") for lab in labels) / len(labels)


# -- place measures ----------------------------------------------------------
# A message set is a sequence of per-message tag lists.

def place_density(tag_lists):
    tag_lists = list(tag_lists)
    if not tag_lists:
        raise UndefinedMetric("empty message set")
    return sum(len(t) for t in tag_lists) / len(tag_lists)


def place_variety(tag_lists, mode="per_message"):
    tag_lists = list(tag_lists)
    if not tag_lists:
        raise UndefinedMetric("empty message set")
    if mode == "per_message":
        return sum(len({t.place_id for t in tags}) for tags in tag_lists) / len(tag_lists)
    if mode == "event_level":
        return len({t.place_id for tags in tag_lists for t in tags}) / len(tag_lists)
    raise ValueError(f"unknown variety mode {mode!r}")


def place_ids(tag_lists):
    return {t.place_id for tags in tag_lists for t in tags}


def coverage_gain(reply_tag_lists, relevant_tag_lists):
    known = place_ids(relevant_tag_lists)
    if not known:
        raise UndefinedMetric("relevant messages mention no places")
    return len(place_ids(reply_tag_lists) - known) / len(known)


def granularity_distribution(tag_lists):
    counts = {g: 0 for g in GRANULARITIES}
    for tags in tag_lists:
        for t in tags:
            counts[t.granularity] += 1
    total = sum(counts.values())
    if not total:
        raise UndefinedMetric("no place tags")
    return {g: c / total for g, c in counts.items()}


# -- significance ------------------------------------------------------------

@dataclass(frozen=True)
class SignificanceResult:
    t: float
    df: float
    p: float
    stars: str

    def to_dict(self):
        return {"t": self.t, "df": self.df, "p": self.p, "stars": self.stars}


def stars_for(p):
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return "ns"


def welch_t_test(sample_a, sample_b):
    """Two-tailed Welch's unequal-variance t-test."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise SignificanceTestError("each sample needs at least two values")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va <= 0 and vb <= 0:
        raise SignificanceTestError("both samples have zero variance")
    qa, qb = va / na, vb / nb
    se2 = qa + qb
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    den = qa ** 2 / (na - 1) + qb ** 2 / (nb - 1)
    if den <= 0 or not math.isfinite(t):
        raise SignificanceTestError("variance too small to test")
    df = float(se2 ** 2 / den)
    # two-tailed p = I_{df/(df+t^2)}(df/2, 1/2)
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    p = min(max(p, 0.0), 1.0)
    return SignificanceResult(t, df, p, stars_for(p))


# -- crisis map --------------------------------------------------------------

@dataclass(frozen=True)
class GridCell:
    row: int
    col: int
    cell_deg: float
    damage_count: int
    message_count: int

    @property
    def bounds(self):
        lat0, lon0 = self.row * self.cell_deg, self.col * self.cell_deg
        return lat0, lon0, lat0 + self.cell_deg, lon0 + self.cell_deg


def finest_tag(tags):
    return min(tags, key=lambda t: GRANULARITY_RANK[t.granularity]) if tags else None


def crisis_map(messages, cell_deg=0.5):
    """Bin tagged messages at their finest-granularity tag.

    messages: iterable of (damage_label, tags). damage_count counts the
    damage-present messages in a cell, message_count every tagged message.
    Only cells with at least one damage-present message are returned.
    """
    if cell_deg <= 0:
        raise ValueError("cell size must be positive")
    cells = {}
    for label, tags in messages:
        t = finest_tag(tags)
        if t is None:
            continue
        key = (math.floor(t.lat / cell_deg), math.floor(t.lon / cell_deg))
        dmg, tot = cells.get(key, (0, 0))
        cells[key] = (dmg + (label == "present"), tot + 1)
    return [GridCell(r, c, cell_deg, d, n) for (r, c), (d, n) in sorted(cells.items()) if d]


def crisis_map_geojson(cells):
    feats = []
    for cell in cells:
        lat0, lon0, lat1, lon1 = cell.bounds
        feats.append({
            "type": "Feature",
            "geometry": {"type": "Polygon",
                         "coordinates": [[[lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]]]},
            "properties": {"row": cell.row, "col": cell.col,
                           "damage_count": cell.damage_count, "message_count": cell.message_count},
        })
    return {"type": "FeatureCollection", "features": feats}


# -- event log and report -----------------------------------------------------

@dataclass
class ReplyRecord:
    msg_id: str
    question_id: str
    kind: str
    delta_t: float
    collaborative: bool


@dataclass
class EventLog:
    event: EarthquakeEvent
    collected: list = field(default_factory=list)      # msg ids
    relevant: list = field(default_factory=list)       # msg ids, subset of collected
    reply2damage: list = field(default_factory=list)   # ReplyRecord
    reply2geo: list = field(default_factory=list)      # ReplyRecord
    dispatch: list = field(default_factory=list)
    tags: dict = field(default_factory=dict)           # msg id -> [PlaceTag]
    damage: dict = field(default_factory=dict)         # msg id -> damage label
    collaborative_source: str = "ground_truth"
    dropped: int = 0
    variety_mode: str = "per_message"
    grid_cell_deg: float = 0.5

    @property
    def replies(self):
        return self.reply2damage + self.reply2geo

    def tag_lists(self, ids):
        return [self.tags.get(i, []) for i in ids]

    def to_dict(self):
        def reply(r):
            return {"msg_id": r.msg_id, "question_id": r.question_id, "kind": r.kind,
                    "delta_t": r.delta_t, "collaborative": r.collaborative}
        return {
            "event": self.event.to_dict(),
            "collected": list(self.collected),
            "relevant": list(self.relevant),
            "reply2damage": [reply(r) for r in self.reply2damage],
            "reply2geo": [reply(r) for r in self.reply2geo],
            "dispatch": list(self.dispatch),
            "tags": {k: [t.to_dict() for t in v] for k, v in self.tags.items()},
            "damage": dict(self.damage),
            "collaborative_source": self.collaborative_source,
            "dropped": self.dropped,
            "variety_mode": self.variety_mode,
            "grid_cell_deg": self.grid_cell_deg,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            event=EarthquakeEvent.from_dict(d["event"]),
            collected=list(d["collected"]),
            relevant=list(d["relevant"]),
            reply2damage=[ReplyRecord(**r) for r in d["reply2damage"]],
            reply2geo=[ReplyRecord(**r) for r in d["reply2geo"]],
            dispatch=list(d["dispatch"]),
            tags={k: [PlaceTag.from_dict(t) for t in v] for k, v in d["tags"].items()},
            damage=dict(d["damage"]),
            collaborative_source=d["collaborative_source"],
            dropped=d["dropped"],
            variety_mode=d["variety_mode"],
            grid_cell_deg=d["grid_cell_deg"],
        )


@dataclass(frozen=True)
class Undefined:
    reason: str

    def to_dict(self):
        return {"undefined": self.reason}


def percent(x, signed=False):
    """Whole-percent string, rounding half to even."""
    if isinstance(x, Undefined):
        return x
    pct = round(Fraction(x) * 100)
    return f"{'+' if signed and pct >= 0 else ''}{pct}%"


def _try(fn, *args):
    try:
        return fn(*args)
    except (UndefinedMetric, SignificanceTestError) as exc:
        return Undefined(str(exc))


@dataclass
class MetricsReport:
    event_id: str
    place: str
    magnitude: float
    depth_km: float
    counts: dict
    message_gain: object
    message_gain_pct: object
    collaborative_rate: object
    collaborative_pct: object
    collaborative_source: str
    mean_reply_latency: object
    damage_ratio: dict
    damage_info_ratio: object
    place_density: dict
    place_variety: dict
    variety_mode: str
    coverage_gain: object
    granularity_distribution: dict
    significance: dict

    def to_dict(self):
        return {f.name: _encode(getattr(self, f.name)) for f in fields(self)}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        return cls(**{f.name: _decode(d[f.name]) for f in fields(cls)})

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def _encode(v):
    if isinstance(v, (Undefined, SignificanceResult)):
        return v.to_dict()
    if isinstance(v, dict):
        return {k: _encode(x) for k, x in v.items()}
    return v


def _decode(v):
    if isinstance(v, dict):
        if set(v) == {"undefined"}:
            return Undefined(v["undefined"])
        if set(v) == {"t", "df", "p", "stars"}:
            return SignificanceResult(v["t"], v["df"], v["p"], v["stars"])
        return {k: _decode(x) for k, x in v.items()}
    return v


def _per_message(tag_lists, fn):
    return [fn(tags) for tags in tag_lists]


def build_report(log):
    rel_tags = log.tag_lists(log.relevant)
    geo_tags = log.tag_lists([r.msg_id for r in log.reply2geo])
    replies = log.replies
    rel_damage = [log.damage.get(i, "no_info") for i in log.relevant]
    r2d_damage = [log.damage.get(r.msg_id, "no_info") for r in log.reply2damage]
    sent = sum(1 for e in log.dispatch if e.get("status") == "sent")

    gain = _try(message_gain, len(replies), len(log.relevant))
    collab = _try(collaborative_rate, [r.collaborative for r in replies])

    sig = {
        "damage": _try(welch_t_test, [float(x == "present") for x in rel_damage],
                       [float(x == "present") for x in r2d_damage]),
        "density": _try(welch_t_test, _per_message(rel_tags, len), _per_message(geo_tags, len)),
        "variety": _try(welch_t_test, _per_message(rel_tags, lambda t: len({x.place_id for x in t})),
                        _per_message(geo_tags, lambda t: len({x.place_id for x in t}))),
    }
    for g in GRANULARITIES:
        def level_count(tags, g=g):
            return sum(t.granularity == g for t in tags)
        sig[f"granularity_{g}"] = _try(welch_t_test, _per_message(rel_tags, level_count),
                                       _per_message(geo_tags, level_count))

    return MetricsReport(
        event_id=log.event.event_id,
        place=log.event.place_name,
        magnitude=log.event.magnitude,
        depth_km=log.event.depth_km,
        counts={
            "collected": len(log.collected),
            "relevant": len(log.relevant),
            "replies": len(replies),
            "reply2damage": len(log.reply2damage),
            "reply2geo": len(log.reply2geo),
            "collaborative": sum(r.collaborative for r in replies),
            "dropped": log.dropped,
            "questions_sent": sent,
            "questions_expired": sum(1 for e in log.dispatch if e.get("status") == "expired"),
            "duplicates_suppressed": sum(1 for e in log.dispatch
                                         if e.get("status") == "duplicate-contact-suppressed"),
        },
        message_gain=gain,
        message_gain_pct=percent(gain, signed=True),
        collaborative_rate=collab,
        collaborative_pct=percent(collab),
        collaborative_source=log.collaborative_source,
        mean_reply_latency=_try(mean_reply_latency, [r.delta_t for r in replies]),
        damage_ratio={"relevant": _try(damage_ratio, rel_damage), "reply2damage": _try(damage_ratio, r2d_damage)},
        damage_info_ratio=_try(damage_info_ratio, r2d_damage),
        place_density={"relevant": _try(place_density, rel_tags), "reply2geo": _try(place_density, geo_tags)},
        place_variety={"relevant": _try(place_variety, rel_tags, log.variety_mode),
                       "reply2geo": _try(place_variety, geo_tags, log.variety_mode)},
        variety_mode=log.variety_mode,
        coverage_gain=_try(coverage_gain, geo_tags, rel_tags),
        granularity_distribution={"relevant": _try(granularity_distribution, rel_tags),
                                  "reply2geo": _try(granularity_distribution, geo_tags)},
        significance=sig,
    )


def report_crisis_map(log):
    ids = list(log.relevant) + [r.msg_id for r in log.replies]
    return crisis_map(((log.damage.get(i, "no_info"), log.tags.get(i, [])) for i in ids), log.grid_cell_deg)


SUMMARY_COLUMNS = ("event_id", "place", "magnitude", "depth_km", "collected", "relevant", "replies",
                   "collaborative", "message_gain", "reply_latency_min")


def summary_csv(reports):
    """Table-1-style CSV, one row per report."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in reports:
        lat = r.mean_reply_latency
        w.writerow([r.event_id, r.place, r.magnitude, r.depth_km, r.counts["collected"], r.counts["relevant"],
                    r.counts["replies"], _cell(r.collaborative_pct), _cell(r.message_gain_pct),
                    "" if isinstance(lat, Undefined) else round(lat)])
    return buf.getvalue()


def _cell(v):
    return "" if isinstance(v, Undefined) else v
