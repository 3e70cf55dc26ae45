"""Opportunistic collection: keyword/geotag matching under a crawl rate limit."""
import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from .geo import haversine_km
from .templates import DEFAULT_KEYWORDS


@dataclass(frozen=True)
class CollectionFilter:
    keywords: tuple = DEFAULT_KEYWORDS
    match_geotagged_in_radius: bool = False
    radius_km: float = 50.0

    def __post_init__(self):
        kws = tuple(k.lower() for k in self.keywords)
        if any(not k.strip() for k in kws):
            raise ValueError("keywords must be non-empty strings")
        if not kws and not self.match_geotagged_in_radius:
            raise ValueError("filter needs keywords or geotag matching")
        object.__setattr__(self, "keywords", kws)


@lru_cache(maxsize=64)
def _keyword_re(keywords):
    # \b is unreliable next to non-word keyword chars, so use explicit lookarounds
    alts = "|".join(re.escape(k) for k in sorted(keywords, key=len, reverse=True))
    return re.compile(rf"(?<![^\W_])(?:{alts})(?![^\W_])", re.IGNORECASE)


def match(message, flt, event):
    if flt.keywords and _keyword_re(flt.keywords).search(message.text):
        return True
    if flt.match_geotagged_in_radius and message.geotag is not None:
        lat, lon = message.geotag
        return haversine_km(lat, lon, event.epicenter_lat, event.epicenter_lon) <= flt.radius_km
    return False


@dataclass
class CollectStats:
    matched: int = 0
    collected: int = 0
    dropped: int = 0
    duplicates: int = 0
    dropped_ids: list = field(default_factory=list)


def collect(stream, flt, event, crawl_limit=None, window_ms=60_000, stats=None):
    """Matching messages, deduplicated, with at most crawl_limit per sliding window.

    A message is admitted when fewer than crawl_limit messages were admitted
    in (ts - window_ms, ts]; otherwise it is dropped (newest beyond quota).
    """
    stats = CollectStats() if stats is None else stats
    seen = set()
    recent = deque()
    out = []
    for m in stream:
        if not match(m, flt, event):
            continue
        if m.msg_id in seen:
            stats.duplicates += 1
            continue
        seen.add(m.msg_id)
        stats.matched += 1
        if crawl_limit is not None:
            while recent and recent[0] <= m.timestamp - window_ms:
                recent.popleft()
            if len(recent) >= crawl_limit:
                stats.dropped += 1
                stats.dropped_ids.append(m.msg_id)
                continue
            recent.append(m.timestamp)
        out.append(m)
    stats.collected = len(out)
    return out
