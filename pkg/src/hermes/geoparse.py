"""Gazetteer loading and place-mention extraction.

Place names are matched as whole-token sequences (case-insensitive) with a
token-level Aho-Corasick automaton. Overlapping candidates are resolved
leftmost-longest; ambiguous names are resolved by epicenter distance, then
population, then finer granularity, then place_id.
"""
import re
from collections import deque
from dataclasses import dataclass

from .geo import haversine_km

GRANULARITIES = ("building", "city", "region", "country", "other")
GRANULARITY_RANK = {g: i for i, g in enumerate(GRANULARITIES)}

TSV_COLUMNS = ("place_id", "name", "aliases", "lat", "lon", "granularity", "population", "admin_parent")

_TOKEN_RE = re.compile(r"[^\W_]+")


class GazetteerError(ValueError):
    pass


def token_spans(text):
    """Lowercased alphanumeric tokens with their character spans."""
    return [(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def name_key(name):
    return tuple(t for t, _, _ in token_spans(name))


@dataclass(frozen=True)
class GazetteerEntry:
    place_id: str
    name: str
    aliases: tuple
    lat: float
    lon: float
    granularity: str
    population: int
    admin_parent: str = None

    @property
    def names(self):
        return (self.name,) + tuple(self.aliases)


@dataclass(frozen=True)
class PlaceTag:
    surface: str
    span: tuple
    place_id: str
    lat: float
    lon: float
    granularity: str

    def to_dict(self):
        return {"surface": self.surface, "span": list(self.span), "place_id": self.place_id,
                "lat": self.lat, "lon": self.lon, "granularity": self.granularity}

    @classmethod
    def from_dict(cls, d):
        return cls(d["surface"], tuple(d["span"]), d["place_id"], d["lat"], d["lon"], d["granularity"])


def normalize_granularity(level):
    level = (level or "").strip().lower()
    return level if level in GRANULARITY_RANK else "other"


def resolution_key(entry, context=None):
    """Sort key for ambiguous candidates; the smallest key wins."""
    dist = 0.0
    if context is not None:
        dist = haversine_km(context[0], context[1], entry.lat, entry.lon)
    return (dist, -entry.population, GRANULARITY_RANK[entry.granularity], entry.place_id)


class _Automaton:
    """Aho-Corasick over token sequences. Outputs are pattern lengths in tokens."""

    def __init__(self, patterns):
        self.goto = [{}]
        self.fail = [0]
        self.out = [()]
        for pat in patterns:
            node = 0
            for tok in pat:
                nxt = self.goto[node].get(tok)
                if nxt is None:
                    nxt = len(self.goto)
                    self.goto[node][tok] = nxt
                    self.goto.append({})
                    self.fail.append(0)
                    self.out.append(())
                node = nxt
            if len(pat) not in self.out[node]:
                self.out[node] = self.out[node] + (len(pat),)

        queue = deque(self.goto[0].values())
        while queue:
            node = queue.popleft()
            for tok, child in self.goto[node].items():
                queue.append(child)
                f = self.fail[node]
                while f and tok not in self.goto[f]:
                    f = self.fail[f]
                cand = self.goto[f].get(tok, 0)
                self.fail[child] = cand if cand != child else 0
                self.out[child] = self.out[child] + self.out[self.fail[child]]

    def longest_at(self, tokens):
        """Map start index -> longest pattern length starting there."""
        best = {}
        node = 0
        goto, fail, out = self.goto, self.fail, self.out
        for j, tok in enumerate(tokens):
            while node and tok not in goto[node]:
                node = fail[node]
            node = goto[node].get(tok, 0)
            for length in out[node]:
                start = j - length + 1
                if length > best.get(start, 0):
                    best[start] = length
        return best


class Gazetteer:
    def __init__(self, entries=()):
        self.entries = {}
        for e in entries:
            if e.place_id in self.entries:
                raise GazetteerError(f"duplicate place_id {e.place_id!r}")
            self.entries[e.place_id] = e
        self._by_key = {}
        for e in self.entries.values():
            for n in e.names:
                key = name_key(n)
                if not key:
                    raise GazetteerError(f"{e.place_id}: name {n!r} has no alphanumeric tokens")
                ids = self._by_key.setdefault(key, [])
                if e.place_id not in ids:
                    ids.append(e.place_id)
        self._automaton = None

    def __len__(self):
        return len(self.entries)

    def __contains__(self, place_id):
        return place_id in self.entries

    def __getitem__(self, place_id):
        return self.entries[place_id]

    def __iter__(self):
        return iter(self.entries.values())

    @property
    def name_keys(self):
        return self._by_key

    def candidates(self, key):
        return [self.entries[i] for i in self._by_key.get(key, ())]

    def resolve(self, key, context=None):
        return min(self.candidates(key), key=lambda e: resolution_key(e, context))

    @property
    def automaton(self):
        if self._automaton is None:
            self._automaton = _Automaton(sorted(self._by_key))
        return self._automaton

    def validate(self):
        for e in self.entries.values():
            if e.admin_parent is not None and e.admin_parent not in self.entries:
                raise GazetteerError(f"{e.place_id}: unknown admin_parent {e.admin_parent!r}")
        for e in self.entries.values():
            seen = {e.place_id}
            cur = e
            while cur.admin_parent is not None:
                parent = self.entries[cur.admin_parent]
                if parent.place_id in seen:
                    raise GazetteerError(f"{e.place_id}: cyclic admin_parent chain")
                if ("other" not in (cur.granularity, parent.granularity)
                        and GRANULARITY_RANK[parent.granularity] <= GRANULARITY_RANK[cur.granularity]):
                    raise GazetteerError(
                        f"{cur.place_id}: parent {parent.place_id} ({parent.granularity}) "
                        f"is not coarser than {cur.granularity}")
                seen.add(parent.place_id)
                cur = parent
        return self

    def parent_chain(self, place_id):
        chain = []
        cur = self.entries[place_id]
        while cur.admin_parent is not None:
            cur = self.entries[cur.admin_parent]
            chain.append(cur.place_id)
        return chain


def _parse_row(lineno, line):
    cols = line.split("\t")
    if len(cols) != len(TSV_COLUMNS):
        raise GazetteerError(f"line {lineno}: expected {len(TSV_COLUMNS)} columns, got {len(cols)}")
    pid, name, aliases, lat, lon, gran, pop, parent = (c.strip() for c in cols)
    if not pid:
        raise GazetteerError(f"line {lineno}: empty place_id")
    if not name:
        raise GazetteerError(f"line {lineno}: empty name")
    try:
        lat, lon = float(lat), float(lon)
        pop = int(pop) if pop else 0
    except ValueError as exc:
        raise GazetteerError(f"line {lineno}: {exc}") from None
    if not (-90 <= lat <= 90 and -180 <= lon <= 180):
        raise GazetteerError(f"line {lineno}: coordinates ({lat}, {lon}) out of range")
    if pop < 0:
        raise GazetteerError(f"line {lineno}: negative population")
    alias_list = tuple(a.strip() for a in aliases.split("|") if a.strip()) if aliases else ()
    for n in (name,) + alias_list:
        if not name_key(n):
            raise GazetteerError(f"line {lineno}: name {n!r} has no alphanumeric tokens")
    return GazetteerEntry(pid, name, alias_list, lat, lon, normalize_granularity(gran), pop, parent or None)


def parse_gazetteer(lines):
    entries = []
    seen = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        if lineno == 1 and line.split("\t")[0].strip() == "place_id":
            continue
        e = _parse_row(lineno, line)
        if e.place_id in seen:
            raise GazetteerError(f"line {lineno}: duplicate place_id {e.place_id!r}")
        seen.add(e.place_id)
        entries.append(e)
    return Gazetteer(entries).validate()


def load_gazetteer(path):
    with open(path, encoding="utf-8") as fh:
        return parse_gazetteer(fh)


def write_gazetteer(gazetteer, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(TSV_COLUMNS) + "\n")
        for e in gazetteer:
            fh.write("\t".join([e.place_id, e.name, "|".join(e.aliases), repr(e.lat), repr(e.lon),
                                e.granularity, str(e.population), e.admin_parent or ""]) + "\n")


def select_longest(best, n_tokens):
    """Greedy leftmost-longest, non-overlapping (start, length) selection."""
    picked = []
    i = 0
    while i < n_tokens:
        length = best.get(i)
        if length:
            picked.append((i, length))
            i += length
        else:
            i += 1
    return picked


def geoparse(text, gazetteer, context=None):
    """Tag place mentions in text.

    context, when given, is an (lat, lon) epicenter used to pick among
    same-named places.
    """
    spans = token_spans(text)
    if not spans or not len(gazetteer):
        return []
    tokens = [t for t, _, _ in spans]
    best = gazetteer.automaton.longest_at(tokens)
    tags = []
    for start, length in select_longest(best, len(tokens)):
        key = tuple(tokens[start:start + length])
        e = gazetteer.resolve(key, context)
        s, t = spans[start][1], spans[start + length - 1][2]
        tags.append(PlaceTag(text[s:t], (s, t), e.place_id, e.lat, e.lon, e.granularity))
    return tags


def granularity_of(place_id, gazetteer):
    try:
        return gazetteer[place_id].granularity
    except KeyError:
        raise KeyError(f"unknown place_id {place_id!r}") from None
