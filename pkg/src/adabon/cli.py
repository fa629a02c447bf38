"""Command line entry point: ``adabon {simulate,oracle,batches,metrics}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import harness, oracle
from .sources import load_reward_log


def _simulate(args):
    spec = harness.ExperimentSpec.load(args.config)
    if args.seed is not None:
        spec.config = replace(spec.config, seed=args.seed)
    result = harness.run_experiment(spec, threads=args.threads)
    paths = harness.write_outputs(result, args.out)
    for kind, path in paths.items():
        print(f"{kind}: {path}")


def _oracle(args):
    with open(args.instance, encoding="utf-8") as fh:
        inst = json.load(fh)
    start = time.perf_counter()
    report = oracle.oracle_report(inst["p"], int(inst["B"]), int(inst["d"]))
    report["seconds"] = time.perf_counter() - start
    print(json.dumps(report, indent=2))


def _load_universe(path: Path) -> list[str]:
    if path.suffix == ".jsonl":
        return list(load_reward_log(path))
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return list(data)


def _batches(args):
    batches = harness.build_batches(_load_universe(Path(args.universe)), args.k, args.n, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(batches, fh, indent=1)
        fh.write("\n")


def _metrics(args):
    raw = harness.read_raw(args.raw)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"summary: {harness.emit_report(raw, 'summary', out / 'summary.csv')}")
    print(f"series: {harness.emit_report(raw, 'series', out / 'series.csv')}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adabon", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a full experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $ADABON_THREADS or CPU count)")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("oracle", help="exact uniform and two-stage values of a Bernoulli instance")
    p.add_argument("--instance", required=True, help='JSON: {"p": [...], "B": int, "d": int}')
    p.set_defaults(func=_oracle)

    p = sub.add_parser("batches", help="sample prompt batches from a universe")
    p.add_argument("--universe", required=True, help="JSON list/object of ids or a .jsonl reward log")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_batches)

    p = sub.add_parser("metrics", help="recompute summary tables from batches.jsonl")
    p.add_argument("--raw", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"adabon: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
