"""Witness scoring and contact selection for the participatory phase."""
import json
import math
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from . import data_path
from .classify import FeatureVector, featurize, tokenize
from .geoparse import geoparse

FIRST_PERSON = frozenset({"i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "im", "ive"})
POSITIVE = frozenset({"safe", "fine", "ok", "okay", "good", "thankfully", "glad", "great", "well", "relieved"})
NEGATIVE = frozenset({"scary", "scared", "terrible", "hurt", "injured", "damaged", "collapsed", "broken",
                      "freaking", "trapped", "panic", "fear", "afraid", "awful", "dead", "destroyed"})


@dataclass(frozen=True)
class WitnessFeatures:
    # (i) linguistic
    first_person_rate: float = 0.0
    exclamation_rate: float = 0.0
    token_count: float = 0.0
    # (ii) lexical-embedding proxy
    lexicon_similarity: float = 0.0
    # (iii) sentiment
    sentiment: float = 0.0
    # (iv) entity proxy
    entity_count: float = 0.0
    # (v) metadata
    geotag: float = 0.0
    account_age_bucket: float = 0.0

    def as_array(self):
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)

    def __add__(self, other):
        return WitnessFeatures(*(a + b for a, b in zip(self.as_array(), other.as_array())))


FEATURE_NAMES = tuple(f.name for f in fields(WitnessFeatures))


@lru_cache(maxsize=1)
def witness_centroid():
    with open(data_path("witness_centroid.json"), encoding="utf-8") as fh:
        d = json.load(fh)
    return FeatureVector(np.asarray(d["indices"], dtype=np.int64), np.asarray(d["values"], dtype=float))


def lexicon_centroid(texts):
    """Unit-norm mean of the hashed feature vectors of texts."""
    acc = {}
    for t in texts:
        fv = featurize(t)
        for i, v in zip(fv.indices.tolist(), fv.values.tolist()):
            acc[i] = acc.get(i, 0.0) + v
    idx = np.array(sorted(acc), dtype=np.int64)
    vals = np.array([acc[i] for i in idx.tolist()], dtype=float)
    if len(vals):
        vals /= np.linalg.norm(vals)
    return FeatureVector(idx, vals)


def _cosine(a, b):
    if not len(a.indices) or not len(b.indices):
        return 0.0
    common, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True, return_indices=True)
    return float(np.dot(a.values[ia], b.values[ib]))


def age_bucket(days):
    if days is None:
        return 0
    return 0 if days < 30 else 1 if days < 365 else 2


def extract_witness_features(message, gazetteer=None, account_age_days=None, centroid=None):
    text = message.text
    toks = tokenize(text)
    n = len(toks)
    if centroid is None:
        centroid = witness_centroid()
    pos = sum(t in POSITIVE for t in toks)
    neg = sum(t in NEGATIVE for t in toks)
    return WitnessFeatures(
        first_person_rate=sum(t in FIRST_PERSON for t in toks) / n if n else 0.0,
        exclamation_rate=text.count("!") / len(text) if text else 0.0,
        token_count=float(n),
        lexicon_similarity=_cosine(featurize(text), centroid),
        sentiment=(pos - neg) / (pos + neg) if pos + neg else 0.0,
        entity_count=float(len(geoparse(text, gazetteer))) if gazetteer is not None else 0.0,
        geotag=1.0 if message.geotag is not None else 0.0,
        account_age_bucket=float(age_bucket(account_age_days)),
    )


@dataclass
class LinearScorer:
    weights: dict
    bias: float = 0.0

    def vector(self):
        return np.array([self.weights.get(n, 0.0) for n in FEATURE_NAMES], dtype=float)

    def scaled(self, factor):
        return LinearScorer({k: v * factor for k, v in self.weights.items()}, self.bias * factor)

    def to_json(self):
        d = {n: self.weights.get(n, 0.0) for n in FEATURE_NAMES}
        d["bias"] = self.bias
        return json.dumps(d, indent=2)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        bias = float(d.pop("bias", 0.0))
        unknown = set(d) - set(FEATURE_NAMES)
        if unknown:
            raise ValueError(f"unknown witness features {sorted(unknown)}")
        return cls({k: float(v) for k, v in d.items()}, bias)

    @classmethod
    def load(cls, path=None):
        with open(path or data_path("witness_weights.json"), encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def witness_score(model, features):
    x = features.as_array() if isinstance(features, WitnessFeatures) else np.asarray(features, dtype=float)
    s = float(np.dot(model.vector(), x) + model.bias)
    return s if math.isfinite(s) else 0.0


def train_witness_scorer(features, labels, epochs=20, lam=1e-3, seed=0):
    """Pegasos-style hinge-loss SGD; labels are booleans."""
    X = np.array([f.as_array() for f in features], dtype=float)
    y = np.where(np.asarray(labels, dtype=bool), 1.0, -1.0)
    w = np.zeros(X.shape[1])
    b = 0.0
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(len(y)):
            t += 1
            eta = 1.0 / (lam * (t + 100))
            margin = y[i] * (X[i] @ w + b)
            w *= 1 - eta * lam
            if margin < 1:
                w += eta * y[i] * X[i]
                b += eta * y[i] * 0.1
    return LinearScorer(dict(zip(FEATURE_NAMES, w.tolist())), float(b))


@dataclass(frozen=True)
class ContactTarget:
    user_id: str
    source_msg_id: str
    witness_score: float
    question_kind: str


def select_candidates(scored, budget, already_contacted=frozenset()):
    """Top-scored eligible users, one per user.

    scored: iterable of (message, score). Each user is represented by their
    best message (ties: earlier timestamp, then msg_id). Users are ranked by
    score, then earlier timestamp, then user_id.
    """
    if budget <= 0:
        return []
    best = {}
    for msg, s in scored:
        if msg.author_id in already_contacted:
            continue
        key = (-s, msg.timestamp, msg.msg_id)
        cur = best.get(msg.author_id)
        if cur is None or key < cur[0]:
            best[msg.author_id] = (key, msg, s)
    ranked = sorted(best.values(), key=lambda v: (v[0][0], v[0][1], v[1].author_id))
    return [ContactTarget(msg.author_id, msg.msg_id, s, "ask_damage" if msg.geotag is not None else "ask_geo")
            for _, msg, s in ranked[:budget]]
