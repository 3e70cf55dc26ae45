"""Generators for the bundled data files (gazetteer, corpora, models, feed).

Run ``python -m hermes.fixtures`` to regenerate everything under
``hermes/data``. Output is a pure function of the seeds below.
"""
import json
import random
import sys

from . import data_path
from . import templates as T
from .classify import Example, train, write_corpus
from .feed import EarthquakeEvent, to_usgs_feed
from .geo import destination, haversine_km
from .geoparse import Gazetteer, GazetteerEntry, geoparse, token_spans, write_gazetteer
from .world import RawMessage
from .witness import extract_witness_features, lexicon_centroid, train_witness_scorer

GAZETTEER_SIZE = 5000
GAZETTEER_SEED = 11
CORPUS_SEED = 23
WITNESS_SEED = 31

# the five studied events; epicenters approximate the USGS locations
EVENTS = [
    EarthquakeEvent("sanramon2015", 3.5, 11.0, 37.780, -121.960, 1427985060000, "San Ramon, California"),
    EarthquakeEvent("lila2015", 4.8, 81.0, 9.560, 124.110, 1427706660000, "Lila, Philippines"),
    EarthquakeEvent("lamjung2015", 7.5, 12.0, 28.231, 84.731, 1429942285000, "Lamjung, Nepal"),
    EarthquakeEvent("kokopo2015", 7.7, 66.0, -4.729, 152.562, 1427599980000, "Kokopo, Papua New Guinea"),
    EarthquakeEvent("irving2015", 3.3, 6.0, 32.840, -96.950, 1427978220000, "Irving, Texas"),
]

# (key, name, aliases, lat, lon, granularity, population, parent key)
REAL_PLACES = [
    ("us", "United States", "USA|United States of America", 39.8, -98.6, "country", 320000000, None),
    ("ca", "California", "", 37.2, -119.5, "region", 39000000, "us"),
    ("tx", "Texas", "", 31.0, -99.0, "region", 27000000, "us"),
    ("ny_state", "New York", "New York State", 42.9, -75.5, "region", 19700000, "us"),
    ("il", "Illinois", "", 40.0, -89.2, "region", 12800000, "us"),
    ("mo", "Missouri", "", 38.4, -92.5, "region", 6000000, "us"),
    ("cc", "Contra Costa County", "Contra Costa", 37.92, -121.95, "region", 1100000, "us"),
    ("sanramon", "San Ramon", "", 37.780, -121.978, "city", 75000, "cc"),
    ("danville", "Danville", "", 37.822, -121.999, "city", 44000, "cc"),
    ("dublin_ca", "Dublin", "", 37.702, -121.935, "city", 57000, "ca"),
    ("pleasanton", "Pleasanton", "", 37.662, -121.875, "city", 79000, "ca"),
    ("walnutcreek", "Walnut Creek", "", 37.906, -122.065, "city", 69000, "cc"),
    ("concord", "Concord", "", 37.978, -122.031, "city", 129000, "cc"),
    ("livermore", "Livermore", "", 37.682, -121.768, "city", 89000, "ca"),
    ("oakland", "Oakland", "", 37.804, -122.271, "city", 420000, "ca"),
    ("sf", "San Francisco", "SF", 37.775, -122.419, "city", 870000, "ca"),
    ("bayarea", "Bay Area", "San Francisco Bay Area", 37.8, -122.2, "other", 7700000, "ca"),
    ("diablo", "Mount Diablo", "", 37.882, -121.914, "other", 0, "cc"),
    ("srmc", "San Ramon Regional Medical Center", "", 37.768, -121.962, "building", 0, "sanramon"),
    ("bishopranch", "Bishop Ranch", "", 37.765, -121.965, "building", 0, "sanramon"),
    ("dublinhs", "Dublin High School", "", 37.719, -121.922, "building", 0, "dublin_ca"),
    ("coliseum", "Oakland Coliseum", "", 37.751, -122.201, "building", 0, "oakland"),
    ("irving", "Irving", "", 32.814, -96.949, "city", 236000, "tx"),
    ("dallas", "Dallas", "", 32.777, -96.797, "city", 1280000, "tx"),
    ("fortworth", "Fort Worth", "", 32.755, -97.331, "city", 812000, "tx"),
    ("arlington", "Arlington", "", 32.736, -97.108, "city", 383000, "tx"),
    ("grandprairie", "Grand Prairie", "", 32.746, -96.998, "city", 183000, "tx"),
    ("garland", "Garland", "", 32.913, -96.639, "city", 234000, "tx"),
    ("plano", "Plano", "", 33.020, -96.699, "city", 274000, "tx"),
    ("paris_tx", "Paris", "", 33.661, -95.556, "city", 25000, "tx"),
    ("irvinghall", "Irving City Hall", "", 32.812, -96.948, "building", 0, "irving"),
    ("texasstadium", "Texas Stadium", "", 32.840, -96.911, "building", 0, "irving"),
    ("lovefield", "Dallas Love Field", "Love Field", 32.847, -96.852, "building", 0, "dallas"),
    ("dfw", "DFW Airport", "Dallas Fort Worth International Airport", 32.899, -97.040, "building", 0, "irving"),
    ("trinity", "Trinity River", "", 32.78, -96.85, "other", 0, "tx"),
    ("newyork", "New York", "New York City|NYC", 40.713, -74.006, "city", 8400000, "ny_state"),
    ("springfield_il", "Springfield", "", 39.781, -89.650, "city", 114000, "il"),
    ("springfield_mo", "Springfield", "", 37.209, -93.292, "city", 167000, "mo"),
    ("uk", "United Kingdom", "UK", 54.0, -2.0, "country", 66000000, None),
    ("york", "York", "", 53.960, -1.082, "city", 210000, "uk"),
    ("fr", "France", "", 46.6, 2.2, "country", 67000000, None),
    ("paris", "Paris", "", 48.857, 2.352, "city", 2100000, "fr"),
    ("ie", "Ireland", "", 53.4, -8.2, "country", 4800000, None),
    ("dublin_ie", "Dublin", "", 53.349, -6.260, "city", 1200000, "ie"),
    ("ph", "Philippines", "", 12.9, 121.8, "country", 100000000, None),
    ("bohol", "Bohol", "", 9.85, 124.15, "region", 1300000, "ph"),
    ("cebu", "Cebu", "", 10.32, 123.75, "region", 2900000, "ph"),
    ("lila", "Lila", "", 9.592, 124.098, "city", 11000, "bohol"),
    ("tagbilaran", "Tagbilaran", "Tagbilaran City", 9.648, 123.853, "city", 105000, "bohol"),
    ("loboc", "Loboc", "", 9.637, 124.031, "city", 17000, "bohol"),
    ("loay", "Loay", "", 9.600, 124.011, "city", 17000, "bohol"),
    ("dimiao", "Dimiao", "", 9.606, 124.167, "city", 15000, "bohol"),
    ("cebucity", "Cebu City", "", 10.316, 123.891, "city", 920000, "cebu"),
    ("lobocchurch", "Loboc Church", "", 9.638, 124.032, "building", 0, "loboc"),
    ("baclayon", "Baclayon Church", "", 9.623, 123.912, "building", 0, "tagbilaran"),
    ("tagbhall", "Tagbilaran City Hall", "", 9.650, 123.855, "building", 0, "tagbilaran"),
    ("chochills", "Chocolate Hills", "", 9.797, 124.164, "other", 0, "bohol"),
    ("bohosea", "Bohol Sea", "", 9.0, 124.5, "other", 0, None),
    ("np", "Nepal", "", 28.4, 84.1, "country", 28000000, None),
    ("gandaki", "Gandaki", "", 28.3, 84.0, "region", 2400000, "np"),
    ("bagmati", "Bagmati", "", 27.7, 85.4, "region", 5500000, "np"),
    ("lamjung", "Lamjung", "Lamjung District", 28.28, 84.35, "region", 167000, "np"),
    ("kathmandu", "Kathmandu", "", 27.717, 85.324, "city", 1000000, "bagmati"),
    ("pokhara", "Pokhara", "", 28.210, 83.986, "city", 420000, "gandaki"),
    ("besisahar", "Besisahar", "", 28.234, 84.376, "city", 20000, "lamjung"),
    ("gorkha", "Gorkha", "", 28.000, 84.633, "city", 34000, "gandaki"),
    ("bhaktapur", "Bhaktapur", "", 27.671, 85.429, "city", 81000, "bagmati"),
    ("lalitpur", "Lalitpur", "Patan", 27.667, 85.317, "city", 285000, "bagmati"),
    ("barpak", "Barpak", "", 28.221, 84.722, "city", 6000, "gandaki"),
    ("dharahara", "Dharahara Tower", "Dharahara", 27.700, 85.312, "building", 0, "kathmandu"),
    ("tia", "Tribhuvan International Airport", "Kathmandu Airport", 27.697, 85.359, "building", 0, "kathmandu"),
    ("bir", "Bir Hospital", "", 27.705, 85.314, "building", 0, "kathmandu"),
    ("ku", "Kathmandu University", "University of Kathmandu", 27.619, 85.538, "building", 0, "kathmandu"),
    ("himalayas", "Himalayas", "Himalaya", 28.5, 84.5, "other", 0, None),
    ("everest", "Mount Everest", "Everest", 27.988, 86.925, "other", 0, "np"),
    ("in", "India", "", 21.0, 78.0, "country", 1300000000, None),
    ("bihar", "Bihar", "", 25.6, 85.6, "region", 104000000, "in"),
    ("up", "Uttar Pradesh", "", 26.8, 80.9, "region", 200000000, "in"),
    ("wb", "West Bengal", "", 22.98, 87.85, "region", 91000000, "in"),
    ("delhi", "Delhi", "New Delhi", 28.614, 77.209, "city", 16000000, "in"),
    ("patna", "Patna", "", 25.594, 85.138, "city", 1700000, "bihar"),
    ("kolkata", "Kolkata", "Calcutta", 22.573, 88.364, "city", 4500000, "wb"),
    ("lucknow", "Lucknow", "", 26.847, 80.947, "city", 2800000, "up"),
    ("bd", "Bangladesh", "", 23.7, 90.4, "country", 160000000, None),
    ("dhaka", "Dhaka", "", 23.810, 90.413, "city", 8900000, "bd"),
    ("png", "Papua New Guinea", "PNG", -6.3, 143.9, "country", 8000000, None),
    ("enb", "East New Britain", "", -4.6, 152.0, "region", 330000, "png"),
    ("wnb", "West New Britain", "", -5.6, 150.1, "region", 260000, "png"),
    ("ncd", "National Capital District", "", -9.44, 147.18, "region", 360000, "png"),
    ("kokopo", "Kokopo", "", -4.352, 152.263, "city", 26000, "enb"),
    ("rabaul", "Rabaul", "", -4.200, 152.172, "city", 8000, "enb"),
    ("kimbe", "Kimbe", "", -5.554, 150.138, "city", 18000, "wnb"),
    ("portmoresby", "Port Moresby", "", -9.443, 147.180, "city", 360000, "ncd"),
    ("kokopomarket", "Kokopo Market", "", -4.345, 152.270, "building", 0, "kokopo"),
    ("rabaulhotel", "Rabaul Hotel", "", -4.199, 152.170, "building", 0, "rabaul"),
    ("bismarck", "Bismarck Sea", "", -4.0, 148.0, "other", 0, None),
    ("tavurvur", "Tavurvur", "", -4.271, 152.203, "other", 0, "enb"),
]

# real region each event's synthetic towns attach to
EVENT_REGION = {"sanramon2015": "cc", "lila2015": "bohol", "lamjung2015": "gandaki",
                "kokopo2015": "enb", "irving2015": "tx"}

_CONS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
BUILDING_SUFFIXES = ("Health Post", "Primary School", "Temple", "Community Hall", "Market", "Hospital",
                     "Police Station", "Bus Park", "Stadium", "Library")
OTHER_PATTERNS = ("{} River", "{} Valley", "Mount {}", "{} Lake", "{} Hills")


def _template_vocabulary():
    vocab = set()
    for sk in T.all_skeletons():
        vocab.update(t for t, _, _ in token_spans(sk.replace("{", " ").replace("}", " ")))
    vocab.update(T.FILLER_WORDS)
    return vocab


def _syllable_name(rng, forbidden):
    while True:
        n = rng.choice((2, 2, 3))
        name = "".join(rng.choice(_CONS) + rng.choice(_VOWELS) for _ in range(n))
        if rng.random() < 0.3:
            name += rng.choice("nrl")
        if name not in forbidden:
            return name.capitalize()


def build_gazetteer(size=GAZETTEER_SIZE, seed=GAZETTEER_SEED):
    rng = random.Random(seed)
    forbidden = _template_vocabulary() | {k for k, *_ in REAL_PLACES}
    ids = {}
    entries = []

    def add(key, name, aliases, lat, lon, gran, pop, parent):
        pid = f"P{len(entries) + 1:05d}"
        ids[key] = pid
        entries.append(GazetteerEntry(pid, name, tuple(a for a in aliases if a), round(lat, 5), round(lon, 5),
                                      gran, int(pop), ids[parent] if parent else None))

    for key, name, aliases, lat, lon, gran, pop, parent in REAL_PLACES:
        add(key, name, aliases.split("|") if aliases else (), lat, lon, gran, pop, parent)

    used = set()

    def fresh():
        while True:
            n = _syllable_name(rng, forbidden)
            if n.lower() not in used:
                used.add(n.lower())
                return n

    # synthetic towns and landmarks around each epicenter
    for ev in EVENTS:
        region = EVENT_REGION[ev.event_id]
        for j in range(22):
            town = fresh()
            lat, lon = destination(ev.epicenter_lat, ev.epicenter_lon, rng.uniform(0, 360), rng.uniform(3, 90))
            add(f"{ev.event_id}_t{j}", town, (), lat, lon, "city", rng.randint(500, 60000), region)
            for b in range(2):
                blat, blon = destination(lat, lon, rng.uniform(0, 360), rng.uniform(0.1, 2))
                suffix = BUILDING_SUFFIXES[(j * 2 + b) % len(BUILDING_SUFFIXES)]
                add(f"{ev.event_id}_t{j}_b{b}", f"{town} {suffix}", (), blat, blon, "building", 0,
                    f"{ev.event_id}_t{j}")
        for j in range(4):
            lat, lon = destination(ev.epicenter_lat, ev.epicenter_lon, rng.uniform(0, 360), rng.uniform(5, 80))
            add(f"{ev.event_id}_o{j}", OTHER_PATTERNS[j % len(OTHER_PATTERNS)].format(fresh()), (), lat, lon,
                "other", 0, region)

    # synthetic worldwide filler, kept away from the epicenters
    city_names = []
    c = 0
    while len(entries) < size:
        while True:
            clat, clon = rng.uniform(-55, 65), rng.uniform(-170, 175)
            if all(haversine_km(clat, clon, ev.epicenter_lat, ev.epicenter_lon) > 1500 for ev in EVENTS):
                break
        ckey = f"syn_c{c}"
        c += 1
        add(ckey, fresh(), (), clat, clon, "country", rng.randint(10 ** 5, 10 ** 8), None)
        for r in range(6):
            if len(entries) >= size:
                break
            rlat, rlon = destination(clat, clon, rng.uniform(0, 360), rng.uniform(20, 300))
            rkey = f"{ckey}_r{r}"
            add(rkey, fresh(), (), rlat, rlon, "region", rng.randint(10 ** 4, 10 ** 7), ckey)
            for t in range(10):
                if len(entries) >= size:
                    break
                tlat, tlon = destination(rlat, rlon, rng.uniform(0, 360), rng.uniform(1, 80))
                # a few names repeat across countries so disambiguation matters
                if city_names and rng.random() < 0.04:
                    name = rng.choice(city_names)
                else:
                    name = fresh()
                    city_names.append(name)
                tkey = f"{rkey}_t{t}"
                add(tkey, name, (), tlat, tlon, "city", rng.randint(100, 2 * 10 ** 6), rkey)
                if t < 7 and len(entries) < size:
                    blat, blon = destination(tlat, tlon, rng.uniform(0, 360), rng.uniform(0.1, 3))
                    add(f"{tkey}_b", f"{name} {rng.choice(BUILDING_SUFFIXES)}", (), blat, blon, "building",
                        0, tkey)
            if r == 0 and len(entries) < size:
                olat, olon = destination(rlat, rlon, rng.uniform(0, 360), rng.uniform(1, 60))
                add(f"{rkey}_o", rng.choice(OTHER_PATTERNS).format(fresh()), (), olat, olon, "other", 0, rkey)
    return Gazetteer(entries).validate()


# -- labeled corpora ----------------------------------------------------------

def _fill(rng, skeleton, gaz_names, noise, mag="5.0"):
    k = rng.choice((0, 0, 1, 1, 2))
    names = [rng.choice(gaz_names) for _ in range(k)]
    text = T.garble(skeleton, rng, noise)
    where = " in " + T.render_places(names) if names else ""
    return text.format(where=where, places=T.render_places(names) or rng.choice(gaz_names), mag=mag)


def _flip(rng, label, p):
    return (not label) if rng.random() < p else label


def build_corpora(gazetteer, seed=CORPUS_SEED, n_relevance=6000, n_damage=6000, noise=0.15, label_noise=0.04):
    rng = random.Random(seed)
    names = sorted({e.name for e in gazetteer})

    def mag():
        return f"{rng.uniform(3, 8):.1f}"

    relevance = []
    for _ in range(n_relevance):
        u = rng.random()
        if u < 0.25:
            sk, lab = rng.choice(T.WITNESS[rng.choice(list(T.WITNESS))]), True
        elif u < 0.45:
            sk, lab = rng.choice(T.NEWS[rng.choice(list(T.NEWS))]), True
        elif u < 0.9:
            sk, lab = rng.choice(T.OFFTOPIC), False
        else:
            sk, lab = rng.choice(T.CHATTER), False
        relevance.append(Example(_fill(rng, sk, names, noise, mag()), _flip(rng, lab, label_noise), "relevance"))

    damage_pool = []
    for bank in (T.WITNESS, T.NEWS, T.REPLY_DAMAGE):
        for label, sks in bank.items():
            damage_pool.extend((sk, label) for sk in sks)
    damage_pool.extend((sk, "no_info") for sks in T.REPLY_GEO.values() for sk in sks)
    damage = []
    for _ in range(n_damage):
        sk, label = rng.choice(damage_pool)
        text = _fill(rng, sk, names, noise, mag())
        damage.append(Example(text, _flip(rng, label == "present", label_noise), "damage_presence"))
        damage.append(Example(text, _flip(rng, label != "no_info", label_noise), "damage_info"))
    return relevance, damage


def build_witness_corpus(gazetteer, seed=WITNESS_SEED, n=3000, noise=0.1):
    """Messages with witness labels and metadata for the witness scorer.

    Witnesses disclose their location more often, so they are geotagged
    with higher probability in this training set.
    """
    rng = random.Random(seed)
    names = sorted({e.name for e in gazetteer})
    out = []
    for i in range(n):
        u = rng.random()
        if u < 0.4:
            sk, lab = rng.choice(T.WITNESS[rng.choice(list(T.WITNESS))]), True
        elif u < 0.7:
            sk, lab = rng.choice(T.NEWS[rng.choice(list(T.NEWS))]), False
        else:
            sk, lab = rng.choice(T.OFFTOPIC + T.CHATTER), False
        geo = (0.0, 0.0) if rng.random() < (0.3 if lab else 0.05) else None
        msg = RawMessage(f"w{i:05d}", f"w{i:05d}", 1, _fill(rng, sk, names, noise), geo)
        out.append((msg, lab, rng.randint(1, 4000)))
    return out


def build_all(verbose=True):
    def say(*a):
        if verbose:
            print(*a, file=sys.stderr)

    gaz = build_gazetteer()
    write_gazetteer(gaz, data_path("gazetteer.tsv"))
    say(f"gazetteer: {len(gaz)} entries")

    vocab_text = " ".join(sk.replace("{where}", " ").replace("{places}", " ").replace("{mag}", " ")
                          for sk in T.all_skeletons())
    stray = geoparse(vocab_text, gaz)
    if stray:
        raise RuntimeError(f"template text contains gazetteer names: {[t.surface for t in stray]}")

    with open(data_path("feeds", "events.json"), "w", encoding="utf-8") as fh:
        json.dump(to_usgs_feed(EVENTS), fh, indent=2)

    relevance, damage = build_corpora(gaz)
    write_corpus(relevance, data_path("corpus_relevance.jsonl"))
    write_corpus(damage, data_path("corpus_damage.jsonl"))
    for task, corpus in (("relevance", relevance),
                         ("damage_presence", [e for e in damage if e.task == "damage_presence"]),
                         ("damage_info", [e for e in damage if e.task == "damage_info"])):
        model, rep = train(corpus, task, seed=0, return_report=True)
        model.save(data_path("models", f"{task}.json"))
        say(rep.summary())

    centroid = lexicon_centroid(sk.format(where="", places="", mag="")
                                for sks in T.WITNESS.values() for sk in sks)
    with open(data_path("witness_centroid.json"), "w", encoding="utf-8") as fh:
        json.dump({"indices": centroid.indices.tolist(), "values": centroid.values.tolist()}, fh)

    wc = build_witness_corpus(gaz)
    feats = [extract_witness_features(m, gaz, age, centroid) for m, _, age in wc]
    scorer = train_witness_scorer(feats, [lab for _, lab, _ in wc], seed=0)
    with open(data_path("witness_weights.json"), "w", encoding="utf-8") as fh:
        fh.write(scorer.to_json())
    say("witness weights:", scorer.weights, "bias", scorer.bias)


if __name__ == "__main__":
    build_all()
