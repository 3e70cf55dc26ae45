"""hermes command line: run, eval, geoparse, oracle-check, report."""
import argparse
import dataclasses
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from scipy.stats import ttest_ind

from . import data_path
from .classify import DatasetError, TrainingError, auc, load_corpus, train
from .config import ConfigError, load_config
from .dispatch import ContactLedger
from .geoparse import GazetteerError, PlaceTag, geoparse, load_gazetteer
from .metrics import EventLog, build_report, place_density, place_variety, summary_csv, welch_t_test
from . import oracles
from .pipeline import ValidationFailure, check_invariants, run_scenario, write_outputs, write_report_files

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2, 3


def _err(msg):
    print(f"hermes: {msg}", file=sys.stderr)


# -- run -------------------------------------------------------------------

def _run_one(path, out_dir, seed, ledger_path=None):
    cfg = load_config(path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    ledger = ContactLedger(ledger_path) if ledger_path else None
    result = run_scenario(cfg, ledger=ledger)
    check_invariants(result)
    write_outputs(result, out_dir)
    return result.report


def _run_dir(out, path, n_configs):
    if n_configs == 1:
        return out
    return os.path.join(out, os.path.splitext(os.path.basename(path))[0])


def cmd_run(args):
    # fail fast on bad configs before any work starts
    for path in args.config:
        load_config(path)
    dirs = [_run_dir(args.out, p, len(args.config)) for p in args.config]
    if len(set(dirs)) != len(dirs):
        raise ConfigError("config files must have distinct names")
    if args.parallel > 1 and len(args.config) > 1 and not args.ledger:
        with ProcessPoolExecutor(max_workers=args.parallel) as ex:
            futures = [ex.submit(_run_one, p, d, args.seed) for p, d in zip(args.config, dirs)]
            reports = [f.result() for f in futures]
    else:
        reports = [_run_one(p, d, args.seed, args.ledger) for p, d in zip(args.config, dirs)]
    if len(reports) > 1:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(summary_csv(reports))
    sys.stdout.write(summary_csv(reports))
    return EXIT_OK


# -- eval ------------------------------------------------------------------

def cmd_eval(args):
    task = "damage_presence" if args.task == "damage" else args.task
    try:
        corpus = load_corpus(args.corpus, task)
    except (OSError, DatasetError, ValueError) as exc:
        _err(f"corpus: {exc}")
        return EXIT_CONFIG
    if not corpus:
        _err(f"corpus has no examples for task {task}")
        return EXIT_CONFIG
    try:
        _, report = train(corpus, task, seed=args.seed, return_report=True)
    except DatasetError as exc:
        _err(f"corpus: {exc}")
        return EXIT_CONFIG
    print(report.summary())
    return EXIT_OK


# -- geoparse --------------------------------------------------------------

def cmd_geoparse(args):
    try:
        gaz = load_gazetteer(args.gazetteer or data_path("gazetteer.tsv"))
    except (OSError, GazetteerError) as exc:
        _err(f"gazetteer: {exc}")
        return EXIT_CONFIG
    if args.text is not None:
        texts = [args.text]
    else:
        with open(args.file, encoding="utf-8") as fh:
            texts = fh.read().splitlines()
    ctx = tuple(args.epicenter) if args.epicenter else None
    for i, text in enumerate(texts):
        for t in geoparse(text, gaz, ctx):
            prefix = f"{i}\t" if args.file else ""
            print(f"{prefix}{t.span[0]}-{t.span[1]}\t{t.surface}\t{t.place_id}\t{t.lat:.6f}\t{t.lon:.6f}\t{t.granularity}")
    return EXIT_OK


# -- oracle-check ----------------------------------------------------------

def _corrupt_tie_parser(text, gazetteer, context=None):
    """Negative control: resolves ambiguous names by place_id only."""
    tags = geoparse(text, gazetteer, context)
    out = []
    for t in tags:
        cands = gazetteer.candidates(tuple(w.lower() for w in oracles._WORD.findall(t.surface)))
        e = min(cands, key=lambda c: c.place_id) if cands else gazetteer[t.place_id]
        out.append(dataclasses.replace(t, place_id=e.place_id, lat=e.lat, lon=e.lon, granularity=e.granularity))
    return out


def _metric_mismatches(n, seed):
    """Fast metrics against brute-force references on random instances."""
    bad = []
    for k in range(n):
        rng = random.Random(f"{seed}:{k}")
        lists = [[PlaceTag("x", (0, 1), f"p{rng.randrange(8)}", 0.0, 0.0, "city") for _ in range(rng.randrange(4))]
                 for _ in range(rng.randint(1, 12))]
        if abs(place_density(lists) - oracles.brute_density(lists)) > 1e-12:
            bad.append(("density", k))
        for mode in ("per_message", "event_level"):
            if abs(place_variety(lists, mode) - oracles.brute_variety(lists, mode)) > 1e-12:
                bad.append((f"variety/{mode}", k))
        m = rng.randint(2, 40)
        scores = [rng.choice((rng.random(), 0.5)) for _ in range(m)]
        labels = [i % 2 == 0 for i in range(m)]
        if abs(auc(scores, labels) - oracles.pairwise_auc(scores, labels)) > 1e-9:
            bad.append(("auc", k))
        a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 15))]
        b = [rng.gauss(0.5, 2) for _ in range(rng.randint(2, 15))]
        ref = ttest_ind(a, b, equal_var=False)
        if abs(welch_t_test(a, b).p - float(ref.pvalue)) > 1e-6:
            bad.append(("welch", k))
    return bad


def cmd_oracle_check(args):
    try:
        gaz = load_gazetteer(args.gazetteer or data_path("gazetteer.tsv"))
    except (OSError, GazetteerError) as exc:
        _err(f"gazetteer: {exc}")
        return EXIT_CONFIG
    parser = _corrupt_tie_parser if args.corrupt_tie_rule else geoparse
    res = oracles.oracle_check(gaz, args.n, args.seed, parser=parser)
    for m in res.mismatches[:20]:
        print(f"MISMATCH geoparse seed={args.seed} index={m['index']} context={m['context']}\n"
              f"  text: {m['text']!r}\n  got:  {m['got']}\n  want: {m['want']}")
    bad = _metric_mismatches(min(args.n, 2000), args.seed)
    for name, k in bad[:20]:
        print(f"MISMATCH {name} seed={args.seed} index={k}")
    total = len(res.mismatches) + len(bad)
    print(f"oracle-check: n={args.n} seed={args.seed} geoparse_mismatches={len(res.mismatches)} "
          f"metric_mismatches={len(bad)}")
    return EXIT_OK if total == 0 else EXIT_VALIDATION


# -- report ----------------------------------------------------------------

def _find_logs(root):
    if os.path.isfile(os.path.join(root, "event_log.json")):
        return [root]
    return sorted(os.path.join(root, d) for d in os.listdir(root)
                  if os.path.isfile(os.path.join(root, d, "event_log.json")))


def cmd_report(args):
    dirs = _find_logs(args.log)
    if not dirs:
        _err(f"no event_log.json under {args.log}")
        return EXIT_CONFIG
    reports = []
    for d in dirs:
        with open(os.path.join(d, "event_log.json"), encoding="utf-8") as fh:
            elog = EventLog.from_dict(json.load(fh))
        report = build_report(elog)
        write_report_files(elog, report, d)
        reports.append(report)
    sys.stdout.write(summary_csv(reports))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems count as configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="hermes", description="Hybrid crowdsensing earthquake simulator")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run scenario configs end to end")
    r.add_argument("--config", nargs="+", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--parallel", type=int, default=1)
    r.add_argument("--ledger", default=None, help="persistent contact ledger shared across runs (runs sequentially)")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="train and evaluate a text classifier")
    e.add_argument("--corpus", required=True)
    e.add_argument("--task", required=True, choices=("relevance", "damage", "damage_presence", "damage_info"))
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("geoparse", help="tag place mentions")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--file")
    g.add_argument("--gazetteer", default=None)
    g.add_argument("--epicenter", type=float, nargs=2, metavar=("LAT", "LON"))
    g.set_defaults(func=cmd_geoparse)

    o = sub.add_parser("oracle-check", help="compare fast paths against brute-force references")
    o.add_argument("--n", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--gazetteer", default=None)
    o.add_argument("--corrupt-tie-rule", action="store_true", help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)

    rep = sub.add_parser("report", help="rebuild reports from saved event logs")
    rep.add_argument("--log", required=True)
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except ValidationFailure as exc:
        _err(f"validation failure: {exc}")
        return EXIT_VALIDATION
    except (TrainingError, OSError, RuntimeError, ValueError, LookupError) as exc:
        _err(f"runtime error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
