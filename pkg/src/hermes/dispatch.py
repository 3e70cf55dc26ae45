"""Rate-limited question dispatch through a bot pool, with a global no-repeat contact ledger."""
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .templates import QUESTIONS

REPLY_LABELS = {"ask_damage": "reply2damage", "ask_geo": "reply2geo"}


class SchedulingError(RuntimeError):
    pass


@dataclass
class Bot:
    bot_id: str
    max_sends: int
    window_ms: int
    history: list = field(default_factory=list)  # send times, non-decreasing

    def next_free(self, times):
        """Earliest time the bot may send given its (history + planned) send times."""
        if len(times) < self.max_sends:
            return None
        return times[-self.max_sends] + self.window_ms


@dataclass(frozen=True)
class Question:
    question_id: str
    bot_id: str
    target_user: str
    kind: str
    text: str
    sent_time: int

    def to_dict(self):
        return {"question_id": self.question_id, "bot_id": self.bot_id, "target": self.target_user,
                "kind": self.kind, "text": self.text, "sent_time": self.sent_time}


@dataclass(frozen=True)
class Reply:
    msg_id: str
    question_id: str
    delta_t: float  # minutes
    kind: str       # question kind the reply answers
    collaborative: bool
    message: Optional[object] = None

    @property
    def label(self):
        return REPLY_LABELS[self.kind]


class ContactLedger:
    """Append-only record of contacted users, optionally persisted one line per contact."""

    def __init__(self, path=None):
        self.path = path
        self._contacts = {}
        if path is not None and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    user, _, ts = line.partition("\t")
                    self._contacts.setdefault(user, int(ts) if ts else 0)

    def __contains__(self, user_id):
        return user_id in self._contacts

    def __len__(self):
        return len(self._contacts)

    def __iter__(self):
        return iter(self._contacts)

    def snapshot(self):
        return frozenset(self._contacts)

    def add(self, user_id, ts):
        if user_id in self._contacts:
            raise ValueError(f"{user_id} already contacted")
        self._contacts[user_id] = ts
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(f"{user_id}\t{ts}\n")
                fh.flush()
                os.fsync(fh.fileno())


def make_bots(count, max_sends, window_s, prefix="bot"):
    return [Bot(f"{prefix}{i:02d}", int(max_sends), int(round(window_s * 1000))) for i in range(count)]


def schedule(targets, bots, now, event_id="ev", templates=QUESTIONS):
    """Plan a send time and bot for every target.

    Bots are tried round-robin; each target goes to the bot that can send
    earliest (ties keep round-robin order), never exceeding max_sends in any
    half-open window [t, t + window). Nothing is dropped: saturated bots push
    sends later.
    """
    if not targets:
        return []
    if not bots:
        raise SchedulingError("no bots available for a non-empty target list")
    times = {b.bot_id: list(b.history) for b in bots}
    plan = []
    rr = 0
    for k, target in enumerate(targets):
        best = None
        for j in range(len(bots)):
            bot = bots[(rr + j) % len(bots)]
            free = bot.next_free(times[bot.bot_id])
            t = now if free is None else max(now, free)
            if best is None or t < best[0]:
                best = (t, bot, (rr + j) % len(bots))
        t, bot, pos = best
        rr = (pos + 1) % len(bots)
        times[bot.bot_id].append(t)
        q = Question(f"q-{event_id}-{k:05d}", bot.bot_id, target.user_id, target.question_kind,
                     templates[target.question_kind].format(user=target.user_id), t)
        plan.append((q, t))
    return plan


def expire_stale(plan, deadline):
    """Split a plan into sends due by the deadline and expired ones."""
    keep = [(q, t) for q, t in plan if t <= deadline]
    expired = [(q, t) for q, t in plan if t > deadline]
    return keep, expired


def send(plan, world, ledger, bots=None, log=None):
    """Deliver planned questions, skipping anyone already in the ledger.

    Returns the dispatch log (one dict per plan item). If bots are given,
    each send is appended to its bot's history.
    """
    log = [] if log is None else log
    by_id = {b.bot_id: b for b in bots or ()}
    for q, t in plan:
        entry = {"question_id": q.question_id, "bot_id": q.bot_id, "target": q.target_user,
                 "kind": q.kind, "sent_time": t}
        if q.target_user in ledger:
            entry["status"] = "duplicate-contact-suppressed"
        else:
            ledger.add(q.target_user, t)
            if q.bot_id in by_id:
                by_id[q.bot_id].history.append(t)
            if world is not None:
                world.deliver_question(q)
            entry["status"] = "sent"
        log.append(entry)
    return log


def expired_entries(expired):
    return [{"question_id": q.question_id, "bot_id": q.bot_id, "target": q.target_user, "kind": q.kind,
             "sent_time": t, "status": "expired"} for q, t in expired]


def collect_replies(world, horizon):
    from .world import collect_replies as _collect
    return _collect(world, horizon)


def write_dispatch_log(log, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for entry in log:
            fh.write(json.dumps(entry) + "\n")


def read_dispatch_log(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def max_window_count(times, window_ms):
    """Largest number of sends falling in any half-open window [t, t + window_ms)."""
    times = sorted(times)
    best = 0
    j = 0
    for i, t in enumerate(times):
        while j < len(times) and times[j] < t + window_ms:
            j += 1
        best = max(best, j - i)
    return best
