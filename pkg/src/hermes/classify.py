"""Hashed n-gram logistic classifiers for relevance filtering and damage assessment."""
import json
import math
import re
import zlib
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import rankdata

N_BUCKETS = 2 ** 18
TASKS = ("relevance", "damage_presence", "damage_info")
MODEL_FORMAT = "hermes-linear-v1"

_TOKEN_RE = re.compile(r"[^\W_]+")


class TrainingError(RuntimeError):
    pass


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    indices: np.ndarray  # sorted, unique bucket ids
    values: np.ndarray

    @property
    def norm(self):
        return float(np.sqrt(np.dot(self.values, self.values)))

    def dot(self, dense):
        return float(np.dot(dense[self.indices], self.values)) if len(self.indices) else 0.0

    def to_dense(self):
        v = np.zeros(N_BUCKETS)
        v[self.indices] = self.values
        return v


def tokenize(text):
    return _TOKEN_RE.findall(text.lower())


def _bucket(feature):
    return zlib.crc32(feature.encode("utf-8")) % N_BUCKETS


@lru_cache(maxsize=200_000)
def _featurize_cached(text):
    toks = tokenize(text)
    feats = ["u:" + t for t in toks]
    feats += ["b:" + a + " " + b for a, b in zip(toks, toks[1:])]
    if not feats:
        return FeatureVector(np.zeros(0, dtype=np.int64), np.zeros(0))
    idx, counts = np.unique(np.fromiter((_bucket(f) for f in feats), dtype=np.int64, count=len(feats)),
                            return_counts=True)
    vals = counts.astype(float)
    vals /= np.sqrt(np.dot(vals, vals))
    idx.setflags(write=False)
    vals.setflags(write=False)
    return FeatureVector(idx, vals)


def featurize(text):
    """Unigram + bigram counts hashed into 2**18 buckets, L2-normalized."""
    return _featurize_cached(text)


def sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@dataclass
class ClassifierModel:
    weights: np.ndarray
    bias: float = 0.0
    task: str = "relevance"
    threshold: float = 0.5
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        self.threshold = min(max(float(self.threshold), 0.0), 1.0)

    @classmethod
    def zeros(cls, task="relevance", threshold=0.5):
        return cls(np.zeros(N_BUCKETS), 0.0, task, threshold)

    def to_json(self):
        nz = np.flatnonzero(self.weights)
        return json.dumps({
            "format": MODEL_FORMAT,
            "task": self.task,
            "threshold": self.threshold,
            "bias": self.bias,
            "n_buckets": N_BUCKETS,
            "indices": nz.tolist(),
            "weights": self.weights[nz].tolist(),
            "metadata": self.metadata,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, s):
        d = json.loads(s)
        if d.get("format") != MODEL_FORMAT or d.get("n_buckets") != N_BUCKETS:
            raise ValueError("unsupported model file")
        w = np.zeros(N_BUCKETS)
        w[np.asarray(d["indices"], dtype=np.int64)] = d["weights"]
        return cls(w, float(d["bias"]), d["task"], d["threshold"], d.get("metadata", {}))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def score(model, text):
    return sigmoid(featurize(text).dot(model.weights) + model.bias)


def score_many(model, texts):
    return np.array([score(model, t) for t in texts])


def filter_relevant(model, messages):
    if model.task != "relevance":
        raise ValueError(f"filter_relevant needs a relevance model, got {model.task!r}")
    return [m for m in messages if score(model, m.text) >= model.threshold]


def classify_damage(presence_model, info_model, text):
    if not tokenize(text):
        return "no_info"
    if score(presence_model, text) >= presence_model.threshold:
        return "present"
    if score(info_model, text) >= info_model.threshold:
        return "absent_reported"
    return "no_info"


def auc(scores, labels):
    """Probability that a random positive outranks a random negative (ties count half)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(s)  # midranks handle ties exactly
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class Example:
    text: str
    label: bool
    task: str = "relevance"


def load_corpus(path, task=None):
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                ex = Example(str(d["text"]), bool(d["label"]), d.get("task", "relevance"))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from None
            if task is None or ex.task == task:
                out.append(ex)
    return out


def write_corpus(examples, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps({"text": ex.text, "label": ex.label, "task": ex.task}) + "\n")


def split_dataset(corpus, seed=0, fractions=(0.64, 0.16, 0.20)):
    """Stratified train/validation/test split.

    Each class is shuffled independently and cut at the rounded cumulative
    fractions, so per-class proportions are exact up to one example.
    """
    pos = [i for i, ex in enumerate(corpus) if ex.label]
    neg = [i for i, ex in enumerate(corpus) if not ex.label]
    if not pos or not neg:
        raise DatasetError("corpus must contain both classes")
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for idx in (pos, neg):
        idx = [idx[k] for k in rng.permutation(len(idx))]
        n = len(idx)
        c1 = round(n * fractions[0])
        c2 = round(n * (fractions[0] + fractions[1]))
        for part, chunk in zip(parts, (idx[:c1], idx[c1:c2], idx[c2:])):
            part.extend(chunk)
    return tuple([corpus[i] for i in sorted(p)] for p in parts)


@dataclass
class EvalReport:
    task: str
    auc: float
    n_train: int
    n_validation: int
    n_test: int
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int

    def summary(self):
        return (f"task={self.task} auc={self.auc:.4f} threshold={self.threshold:.4f} "
                f"split={self.n_train}/{self.n_validation}/{self.n_test} "
                f"tp={self.tp} fp={self.fp} tn={self.tn} fn={self.fn}")


DEFAULT_HYPERPARAMS = {"epochs": 8, "learning_rate": 0.5, "l2": 1e-5}


def best_f1_threshold(scores, labels):
    """Threshold maximizing F1 on (scores, labels); ties go to the higher threshold."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=bool)
    best_t, best_f1 = 0.5, -1.0
    for t in np.unique(s)[::-1]:
        pred = s >= t
        tp = int((pred & y).sum())
        fp = int((pred & ~y).sum())
        fn = int((~pred & y).sum())
        f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        if f1 > best_f1:
            best_t, best_f1 = float(t), f1
    return best_t


def _sgd(train, epochs, lr, l2, seed):
    w = np.zeros(N_BUCKETS)
    b = 0.0
    feats = [featurize(ex.text) for ex in train]
    ys = [1.0 if ex.label else 0.0 for ex in train]
    rng = np.random.default_rng(seed)
    for epoch in range(epochs):
        loss = 0.0
        step = lr / math.sqrt(epoch + 1)
        for k in rng.permutation(len(train)):
            fv, y = feats[k], ys[k]
            z = fv.dot(w) + b
            p = sigmoid(z)
            loss += -(y * math.log(max(p, 1e-300)) + (1 - y) * math.log(max(1 - p, 1e-300)))
            g = p - y
            if len(fv.indices):
                idx = fv.indices
                # sparse L2: decay only the coordinates this example touches
                w[idx] -= step * (g * fv.values + l2 * w[idx])
            b -= step * g
        if not math.isfinite(loss) or not math.isfinite(b):
            raise TrainingError(f"training diverged in epoch {epoch}")
    if not np.all(np.isfinite(w)):
        raise TrainingError(f"training diverged in epoch {epochs - 1}")
    return w, b


def train(corpus, task="relevance", hyperparams=None, seed=0, return_report=False):
    """Fit a logistic model on the 64% split; pick the F1-optimal threshold on the 16% split."""
    hp = dict(DEFAULT_HYPERPARAMS)
    hp.update(hyperparams or {})
    tr, va, te = split_dataset(corpus, seed)
    w, b = _sgd(tr, int(hp["epochs"]), float(hp["learning_rate"]), float(hp["l2"]), seed)
    model = ClassifierModel(w, b, task, 0.5, {"hyperparams": hp, "seed": seed})
    va_scores = score_many(model, [ex.text for ex in va])
    model.threshold = best_f1_threshold(va_scores, [ex.label for ex in va])
    if not return_report:
        return model
    return model, evaluate(model, te, n_train=len(tr), n_validation=len(va))


def evaluate(model, test, n_train=0, n_validation=0):
    s = score_many(model, [ex.text for ex in test])
    y = np.array([ex.label for ex in test], dtype=bool)
    pred = s >= model.threshold
    return EvalReport(
        task=model.task, auc=auc(s, y), n_train=n_train, n_validation=n_validation, n_test=len(test),
        threshold=model.threshold,
        tp=int((pred & y).sum()), fp=int((pred & ~y).sum()),
        tn=int((~pred & ~y).sum()), fn=int((~pred & y).sum()),
    )
