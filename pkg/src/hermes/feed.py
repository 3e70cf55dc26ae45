"""USGS-style GeoJSON earthquake feeds and the campaign trigger rule."""
import json
import math
from dataclasses import dataclass, asdict

DEFAULT_MIN_MAGNITUDE = 3.0


class FeedParseError(ValueError):
    pass


class FeedValidationError(ValueError):
    pass


@dataclass(frozen=True)
class EarthquakeEvent:
    event_id: str
    magnitude: float
    depth_km: float
    epicenter_lat: float
    epicenter_lon: float
    origin_time: int  # epoch ms
    place_name: str = ""

    def validate(self):
        if not isinstance(self.event_id, str) or not self.event_id:
            raise FeedValidationError("event_id must be a non-empty string")
        for name in ("magnitude", "depth_km", "epicenter_lat", "epicenter_lon"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise FeedValidationError(f"{self.event_id}: {name} must be a finite number")
        if not -90 <= self.epicenter_lat <= 90:
            raise FeedValidationError(f"{self.event_id}: latitude {self.epicenter_lat} out of range")
        if not -180 <= self.epicenter_lon <= 180:
            raise FeedValidationError(f"{self.event_id}: longitude {self.epicenter_lon} out of range")
        if not 0 <= self.magnitude <= 10:
            raise FeedValidationError(f"{self.event_id}: magnitude {self.magnitude} out of range")
        if self.depth_km < 0:
            raise FeedValidationError(f"{self.event_id}: negative depth")
        if isinstance(self.origin_time, bool) or not isinstance(self.origin_time, int) or self.origin_time <= 0:
            raise FeedValidationError(f"{self.event_id}: origin_time must be a positive integer (ms)")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(event_id=d["event_id"], magnitude=d["magnitude"], depth_km=d["depth_km"],
                   epicenter_lat=d["epicenter_lat"], epicenter_lon=d["epicenter_lon"],
                   origin_time=d["origin_time"], place_name=d.get("place_name", "")).validate()


def _feature_to_event(i, feat):
    try:
        props = feat["properties"]
        lon, lat, depth = feat["geometry"]["coordinates"][:3]
        return EarthquakeEvent(
            event_id=feat["id"],
            magnitude=props["mag"],
            depth_km=depth,
            epicenter_lat=lat,
            epicenter_lon=lon,
            origin_time=props["time"],
            place_name=props.get("place") or "",
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FeedParseError(f"feature {i}: malformed ({exc!r})") from exc


def parse_usgs_feed(document):
    """Parse a feed document (str, bytes or already-decoded dict).

    Unknown fields are ignored. Events come back in feed order.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FeedParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict) or not isinstance(document.get("features"), list):
        raise FeedParseError("document has no 'features' array")

    events = []
    seen = set()
    for i, feat in enumerate(document["features"]):
        if not isinstance(feat, dict):
            raise FeedParseError(f"feature {i}: not an object")
        ev = _feature_to_event(i, feat)
        try:
            ev.validate()
        except FeedValidationError as exc:
            raise FeedValidationError(f"feature {i}: {exc}") from None
        if ev.event_id in seen:
            raise FeedValidationError(f"feature {i}: duplicate event id {ev.event_id!r}")
        seen.add(ev.event_id)
        events.append(ev)
    return events


def load_feed(path):
    with open(path, encoding="utf-8") as fh:
        return parse_usgs_feed(fh.read())


def to_usgs_feed(events):
    """Serialize events back into the feed layout parse_usgs_feed reads."""
    return {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "id": ev.event_id,
                "properties": {"mag": ev.magnitude, "time": ev.origin_time, "place": ev.place_name},
                "geometry": {"type": "Point",
                             "coordinates": [ev.epicenter_lon, ev.epicenter_lat, ev.depth_km]},
            }
            for ev in events
        ],
    }


def should_trigger(event, min_magnitude=DEFAULT_MIN_MAGNITUDE):
    return event.magnitude >= min_magnitude
