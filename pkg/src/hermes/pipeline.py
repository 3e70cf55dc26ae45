"""End-to-end run loop: trigger, collect, filter, select, ask, correlate, geoparse, assess, report."""
import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache

from . import data_path
from .classify import ClassifierModel, classify_damage, filter_relevant
from .dispatch import (ContactLedger, expire_stale, expired_entries, make_bots, max_window_count, schedule,
                       send, write_dispatch_log)
from .feed import should_trigger
from .geoparse import geoparse, load_gazetteer
from .ingest import CollectionFilter, CollectStats, collect
from .metrics import EventLog, ReplyRecord, build_report, crisis_map_geojson, report_crisis_map, summary_csv
from .witness import LinearScorer, extract_witness_features, select_candidates, witness_score
from .world import OSNWorld, collect_replies, simulate_stream, write_jsonl

log = logging.getLogger(__name__)


class ValidationFailure(RuntimeError):
    """A post-run invariant (politeness, rate limit, set inclusion) does not hold."""


@lru_cache(maxsize=8)
def _gazetteer(path):
    return load_gazetteer(path)


@lru_cache(maxsize=16)
def _model(path):
    return ClassifierModel.load(path)


def load_models(config):
    c = config.classifiers
    models = {}
    for task in ("relevance", "damage_presence", "damage_info"):
        path = getattr(c, task) or data_path("models", f"{task}.json")
        m = _model(path)
        if task in c.thresholds:
            m = ClassifierModel(m.weights, m.bias, m.task, c.thresholds[task], m.metadata)
        models[task] = m
    models["witness"] = LinearScorer.load(c.witness_weights)
    return models


@dataclass
class RunResult:
    config: object
    triggered: bool
    stream: list = field(default_factory=list)
    collected: list = field(default_factory=list)
    relevant: list = field(default_factory=list)
    replies: list = field(default_factory=list)
    dispatch_log: list = field(default_factory=list)
    collect_stats: CollectStats = field(default_factory=CollectStats)
    event_log: EventLog = None
    report: object = None
    bots: list = field(default_factory=list)
    ledger: ContactLedger = None


def run_scenario(config, ledger=None, gazetteer=None, models=None):
    event = config.event
    gaz = gazetteer or _gazetteer(config.gazetteer or data_path("gazetteer.tsv"))
    models = models or load_models(config)
    if config.dispatch.ledger_scope == "event" or ledger is None:
        ledger = ContactLedger()
    result = RunResult(config, should_trigger(event, config.min_magnitude), ledger=ledger)
    if not result.triggered:
        result.event_log = EventLog(event, variety_mode=config.variety_mode, grid_cell_deg=config.grid_cell_deg)
        result.report = build_report(result.event_log)
        return result

    # 1-2: opportunistic sensing
    world = OSNWorld(config, event, gaz)
    window_ms = int(config.posting.time_window_s * 1000)
    stream = simulate_stream(world, event, window_ms)
    flt = CollectionFilter(tuple(config.keywords), config.collection.match_geotagged_in_radius,
                           config.collection.radius_km)
    stats = CollectStats()
    collected = collect(stream, flt, event, config.collection.crawl_limit,
                        int(config.collection.crawl_window_s * 1000), stats)

    # 3: relevance filtering
    relevant = filter_relevant(models["relevance"], collected)

    # 4: witness selection
    context = (event.epicenter_lat, event.epicenter_lon)
    tags = {}
    for m in relevant:
        tags[m.msg_id] = geoparse(m.text, gaz, context)
    scorer = models["witness"]
    scored = []
    for m in relevant:
        f = extract_witness_features(m, None, world.users[m.author_id].account_age_days)
        f = f.__class__(**{**f.__dict__, "entity_count": float(len(tags[m.msg_id]))})
        scored.append((m, witness_score(scorer, f)))
    targets = select_candidates(scored, config.contact_budget, ledger.snapshot())

    # 5: participatory sensing under bot limits
    now = event.origin_time + window_ms
    bots = make_bots(config.bots.count, config.bots.max_sends, config.bots.window_s, prefix=f"{event.event_id}-bot")
    plan = schedule(targets, bots, now, event.event_id)
    keep, expired = expire_stale(plan, now + int(config.dispatch.staleness_s * 1000))
    dispatch_log = send(keep, world, ledger, bots)
    dispatch_log += expired_entries(expired)

    # 6: reply correlation and analysis
    replies = collect_replies(world, now + int(config.dispatch.reply_horizon_s * 1000))
    for r in replies:
        tags[r.msg_id] = geoparse(r.message.text, gaz, context)
    damage = {}
    pres, info = models["damage_presence"], models["damage_info"]
    for m in relevant:
        damage[m.msg_id] = classify_damage(pres, info, m.text)
    for r in replies:
        damage[r.msg_id] = classify_damage(pres, info, r.message.text)

    def collaborative(r):
        if config.mode == "simulation":
            return r.collaborative
        if r.kind == "ask_geo":
            return bool(tags[r.msg_id])
        return damage[r.msg_id] != "no_info"

    records = [ReplyRecord(r.msg_id, r.question_id, r.label, r.delta_t, bool(collaborative(r))) for r in replies]
    elog = EventLog(
        event=event,
        collected=[m.msg_id for m in collected],
        relevant=[m.msg_id for m in relevant],
        reply2damage=[x for x in records if x.kind == "reply2damage"],
        reply2geo=[x for x in records if x.kind == "reply2geo"],
        dispatch=dispatch_log,
        tags=tags,
        damage=damage,
        collaborative_source="ground_truth" if config.mode == "simulation" else "classifier",
        dropped=stats.dropped,
        variety_mode=config.variety_mode,
        grid_cell_deg=config.grid_cell_deg,
    )
    result.stream = stream
    result.collected = collected
    result.relevant = relevant
    result.replies = replies
    result.dispatch_log = dispatch_log
    result.collect_stats = stats
    result.event_log = elog
    result.report = build_report(elog)
    result.bots = bots
    log.info("%s: collected=%d relevant=%d replies=%d", event.event_id, len(collected), len(relevant), len(replies))
    return result


def check_invariants(result):
    """Raise ValidationFailure if a dispatch or set invariant is violated."""
    sent = [e for e in result.dispatch_log if e["status"] == "sent"]
    users = [e["target"] for e in sent]
    if len(users) != len(set(users)):
        raise ValidationFailure("a user was contacted more than once")
    for bot in result.bots:
        times = [e["sent_time"] for e in sent if e["bot_id"] == bot.bot_id]
        if max_window_count(times, bot.window_ms) > bot.max_sends:
            raise ValidationFailure(f"{bot.bot_id} exceeded its rate limit")
    if result.event_log is not None:
        if not set(result.event_log.relevant) <= set(result.event_log.collected):
            raise ValidationFailure("relevant set is not a subset of collected")
    if len(result.replies) > len(sent):
        raise ValidationFailure("more replies than questions")


def write_outputs(result, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_jsonl(result.stream + [r.message for r in result.replies], os.path.join(out_dir, "messages.jsonl"))
    write_dispatch_log(result.dispatch_log, os.path.join(out_dir, "dispatch.jsonl"))
    with open(os.path.join(out_dir, "event_log.json"), "w", encoding="utf-8") as fh:
        json.dump(result.event_log.to_dict(), fh)
    write_report_files(result.event_log, result.report, out_dir)


def write_report_files(event_log, report, out_dir):
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    with open(os.path.join(out_dir, "crisis_map.geojson"), "w", encoding="utf-8") as fh:
        json.dump(crisis_map_geojson(report_crisis_map(event_log)), fh)
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(summary_csv([report]))
