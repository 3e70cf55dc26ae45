"""Slow, obviously-correct reference implementations used to cross-check the fast paths."""
import random
import re
from dataclasses import dataclass, field

from .geo import haversine_km
from .geoparse import GRANULARITIES, geoparse

_WORD = re.compile(r"[^\W_]+")
_GRAN_ORDER = {g: i for i, g in enumerate(GRANULARITIES)}

FILLER = ("the", "shaking", "was", "strong", "near", "we", "felt", "it", "in", "and", "at", "downtown",
          "everyone", "ok", "north", "of", "street", "big", "house", "so", "scary", "all", "fine", "here")


def _words(text):
    return [w.lower() for w in _WORD.findall(text)]


def name_table(gazetteer):
    """Every (tokenized name, entry) pair in the gazetteer."""
    table = []
    for e in gazetteer:
        for n in (e.name,) + tuple(e.aliases):
            w = tuple(_words(n))
            if w:
                table.append((w, e))
    return table


def naive_geoparse(text, gazetteer, context=None, table=None):
    """Geoparse by checking every gazetteer name at every token position.

    Returns [(token_start, token_len, place_id)] with leftmost-longest,
    non-overlapping selection.
    """
    toks = _words(text)
    present = set(toks)
    names = {}
    for w, e in table if table is not None else name_table(gazetteer):
        if w[0] in present:
            names.setdefault(w, []).append(e)
    out = []
    i = 0
    while i < len(toks):
        best = None
        for w, ents in names.items():
            if tuple(toks[i:i + len(w)]) == w and (best is None or len(w) > len(best[0])):
                best = (w, ents)
        if best is None:
            i += 1
            continue
        w, ents = best

        def key(e):
            d = haversine_km(context[0], context[1], e.lat, e.lon) if context else 0.0
            return d, -e.population, _GRAN_ORDER[e.granularity], e.place_id

        out.append((i, len(w), sorted(set(ents), key=key)[0].place_id))
        i += len(w)
    return out


def fast_as_tokens(text, tags):
    """Convert PlaceTags to the (token_start, token_len, place_id) form."""
    starts = [m.start() for m in _WORD.finditer(text)]
    ends = [m.end() for m in _WORD.finditer(text)]
    out = []
    for t in tags:
        a = starts.index(t.span[0])
        b = ends.index(t.span[1])
        out.append((a, b - a + 1, t.place_id))
    return out


def random_text(rng, gazetteer_names, max_words=30):
    """Text mixing real place names, near-misses and filler words."""
    parts = []
    for _ in range(rng.randint(0, max_words)):
        u = rng.random()
        if u < 0.25:
            name = rng.choice(gazetteer_names)
            r = rng.random()
            if r < 0.2:
                name = name.upper()
            elif r < 0.3:
                name = name.split()[0]      # prefix of a multi-word name
            elif r < 0.35:
                name = name + "s"            # near miss
            parts.append(name)
        elif u < 0.35:
            parts.append(rng.choice((",", ".", "!", "-", "(", ")", "?", "'s")))
        else:
            parts.append(rng.choice(FILLER))
    return " ".join(parts)


@dataclass
class OracleResult:
    n: int
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches


def oracle_check(gazetteer, n=1000, seed=0, parser=geoparse, context=None):
    """Compare parser against naive_geoparse on n random texts."""
    rng = random.Random(seed)
    names = sorted({x for e in gazetteer for x in (e.name,) + tuple(e.aliases)})
    table = name_table(gazetteer)
    res = OracleResult(n)
    for k in range(n):
        text = random_text(rng, names)
        ctx = context
        if ctx is None and rng.random() < 0.5:
            ctx = (rng.uniform(-60, 60), rng.uniform(-180, 180))
        got = fast_as_tokens(text, parser(text, gazetteer, ctx))
        want = naive_geoparse(text, gazetteer, ctx, table)
        if got != want:
            res.mismatches.append({"index": k, "text": text, "context": ctx, "got": got, "want": want})
    return res


# -- metric and classifier references -----------------------------------------

def pairwise_auc(scores, labels):
    """Fraction of positive/negative pairs ranked correctly, ties counted half."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    if not pos or not neg:
        raise ValueError("need both classes")
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def brute_window_violations(times, max_sends, window_ms):
    """Number of send times t whose window [t, t + W) holds more than max_sends sends."""
    return sum(1 for t in times if sum(1 for u in times if t <= u < t + window_ms) > max_sends)


def brute_density(tag_lists):
    n = tot = 0
    for tags in tag_lists:
        n += 1
        for _ in tags:
            tot += 1
    return tot / n


def brute_variety(tag_lists, mode="per_message"):
    if mode == "event_level":
        seen = []
        for tags in tag_lists:
            for t in tags:
                if t.place_id not in seen:
                    seen.append(t.place_id)
        return len(seen) / len(tag_lists)
    tot = 0
    for tags in tag_lists:
        seen = []
        for t in tags:
            if t.place_id not in seen:
                seen.append(t.place_id)
        tot += len(seen)
    return tot / len(tag_lists)
