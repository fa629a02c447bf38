"""Experiment orchestration: batches, run loops, sweeps and report files.

Run ``r`` of batch ``b`` materializes its reward matrix from
``derive_key(seed, b, r)`` and gives policy ``label`` the stream
``make_rng(seed, b, r, "policy", label)``.  Work items are therefore
independent and the thread count (``ADABON_THREADS``) never changes a draw.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .benchmarks import GENERATORS
from .core import BudgetConfig, RunRecord, sequential_sum, validate_config
from .distributions import SyntheticDistribution, from_dict
from .metrics import MetricReport, batch_win_rate, quartile_summary, survival_curve, uniform_curve
from .policies import POLICIES, run_policy, uniform_policy
from .sources import load_reward_log, source_from_dict
from .streams import derive_key, make_rng

log = logging.getLogger(__name__)

SWEEP_AXES = ("K", "B", "d_fraction")
FORMATS = ("raw", "summary", "series")


def policy_label(name: str, estimator: str | None) -> str:
    return f"{name}[{estimator}]" if name == "adabon" else name


@dataclass
class ExperimentSpec:
    config: BudgetConfig
    source: dict
    policies: list[tuple[str, str | None]]
    n_batches: int = 50
    prompt_universe: object = None
    batches: list[list[str]] | None = None
    sweep: dict | None = None

    def __post_init__(self):
        validate_config(self.config)
        self.policies = [(n, e if n == "adabon" else None) for n, e in self.policies]
        for name, _ in self.policies:
            if name not in POLICIES:
                raise ValueError(f"unknown policy {name!r}")
        if self.n_batches < 1:
            raise ValueError("n_batches must be positive")
        if self.sweep is not None:
            axis = self.sweep.get("axis")
            if axis not in SWEEP_AXES:
                raise ValueError(f"sweep axis must be one of {SWEEP_AXES}")
            if not self.sweep.get("values"):
                raise ValueError("sweep needs at least one value")
            if axis == "d_fraction" and not all(0 < v < 1 for v in self.sweep["values"]):
                raise ValueError("d_fraction values must lie in (0, 1)")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | str = ".") -> "ExperimentSpec":
        raw = dict(raw)
        config = BudgetConfig(**raw["config"])
        source = dict(raw.get("source", {"kind": "synthetic"}))
        if "path" in source:
            source["path"] = str(Path(base_dir) / source["path"])
        policies = []
        for p in raw.get("policies", [["adabon", "kde"]]):
            if isinstance(p, dict):
                policies.append((p["name"], p.get("estimator", "kde")))
            elif isinstance(p, str):
                policies.append((p, "kde"))
            else:
                policies.append((p[0], p[1] if len(p) > 1 else "kde"))
        return cls(config=config, source=source, policies=policies,
                   n_batches=raw.get("n_batches", 50),
                   prompt_universe=raw.get("prompt_universe"),
                   batches=raw.get("batches"), sweep=raw.get("sweep"))

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    @property
    def labels(self) -> list[str]:
        return [policy_label(n, e) for n, e in self.policies]


def build_batches(universe: Sequence[str], K: int, n_batches: int, seed: int) -> list[list[str]]:
    """``n_batches`` batches of ``K`` distinct prompts, each sampled uniformly
    without replacement (prompts may recur across batches)."""
    universe = list(universe)
    if K > len(universe):
        raise ValueError(f"universe of {len(universe)} prompts is too small for K={K}")
    rng = make_rng(seed, "batches", K)
    return [[universe[j] for j in rng.choice(len(universe), size=K, replace=False)]
            for _ in range(n_batches)]


@dataclass
class BatchResult:
    batch: int
    prompts: list[str]
    config: BudgetConfig
    reports: dict[str, MetricReport]
    records: dict[str, list[RunRecord]] = field(repr=False)
    axis: str | None = None
    value: float | None = None


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    batches: list[BatchResult]

    def raw_records(self) -> list[dict]:
        out = []
        for br in self.batches:
            for label, rep in br.reports.items():
                out.append({"axis": br.axis, "value": br.value, "batch": br.batch,
                            "policy": label, "prompts": br.prompts, **rep.to_dict()})
        return out

    def run_lines(self) -> list[dict]:
        out = []
        for br in self.batches:
            for label, recs in br.records.items():
                for r, rec in enumerate(recs):
                    out.append({"axis": br.axis, "value": br.value, "batch": br.batch,
                                "run": r, "policy": label,
                                "allocation": list(rec.allocation.counts),
                                "per_prompt_max": list(rec.per_prompt_max),
                                "total": rec.total})
        return out


def _sweep_configs(spec: ExperimentSpec):
    base = spec.config
    if spec.sweep is None:
        yield None, None, base
        return
    axis = spec.sweep["axis"]
    frac = base.exploration_budget / base.per_prompt_budget
    for value in spec.sweep["values"]:
        if axis == "K":
            cfg = BudgetConfig(**{**base.to_dict(), "batch_size": int(value)})
        elif axis == "B":
            B = int(value)
            cap = 2 * B if base.est_cap == 2 * base.per_prompt_budget else max(base.est_cap, B)
            cfg = BudgetConfig(**{**base.to_dict(), "per_prompt_budget": B,
                                  "exploration_budget": max(1, math.floor(frac * B + 0.5)),
                                  "est_cap": cap})
        else:
            d = max(1, math.floor(value * base.per_prompt_budget + 0.5))
            cfg = BudgetConfig(**{**base.to_dict(), "exploration_budget": d})
        yield axis, value, validate_config(cfg)


def _universe_and_batches(spec: ExperimentSpec, cfg: BudgetConfig, pools):
    """Resolve prompt universe (id -> distribution or id) and batch id lists."""
    uni = spec.prompt_universe
    if isinstance(uni, dict) and "generator" in uni:
        gen = GENERATORS[uni["generator"]]
        universe, batches = gen(cfg.batch_size, spec.n_batches, cfg.seed, **uni.get("params", {}))
        return universe, batches
    if isinstance(uni, dict):
        universe = {k: (from_dict(v) if isinstance(v, dict) else v) for k, v in uni.items()}
    elif uni is not None:
        universe = {k: k for k in uni}
    elif pools is not None:
        universe = {k: k for k in pools}
    else:
        raise ValueError("experiment needs a prompt_universe")
    if spec.batches is not None:
        batches = [list(b) for b in spec.batches]
        if any(len(b) != cfg.batch_size for b in batches):
            raise ValueError(f"explicit batches must hold K={cfg.batch_size} prompts")
    else:
        batches = build_batches(list(universe), cfg.batch_size, spec.n_batches, cfg.seed)
    return universe, batches


def _run_batch(spec: ExperimentSpec, cfg: BudgetConfig, b: int, prompt_ids: list[str],
               universe: dict, pools, axis, value) -> BatchResult:
    prompts = [universe[p] for p in prompt_ids]
    if spec.source.get("kind", "synthetic") == "synthetic":
        if not all(isinstance(p, SyntheticDistribution) for p in prompts):
            raise ValueError("synthetic source needs a distribution for every prompt")
    source = source_from_dict(spec.source, prompts if spec.source.get("kind", "synthetic")
                              == "synthetic" else prompt_ids, pools)
    W, B, cap = cfg.matrix_width, cfg.per_prompt_budget, cfg.est_cap
    labels = ["uniform"] + [lb for lb in spec.labels if lb != "uniform"]
    named = dict(zip(spec.labels, spec.policies))
    records = {lb: [] for lb in labels}
    uniform_totals, uniform_max, curves = [], [], []
    uniform_alloc = uniform_policy(cfg).allocation
    for r in range(cfg.runs):
        matrix = source.materialize(W, derive_key(cfg.seed, b, r))
        base = RunRecord.from_matrix("uniform", uniform_alloc, matrix)
        records["uniform"].append(base)
        uniform_totals.append(base.total)
        uniform_max.append(base.per_prompt_max)
        curves.append(uniform_curve(matrix, cap))
        for lb in labels[1:]:
            name, est = named[lb]
            out = run_policy(name, matrix, cfg, est, make_rng(cfg.seed, b, r, "policy", lb))
            records[lb].append(RunRecord.from_matrix(lb, out.allocation, matrix))
    uniform_totals = np.array(uniform_totals)
    uniform_max = np.array(uniform_max)
    curves = np.array(curves)
    reports = {}
    for lb in labels:
        recs = records[lb]
        totals = np.array([x.total for x in recs])
        maxima = np.array([x.per_prompt_max for x in recs])
        curve = survival_curve(totals, curves)
        reports[lb] = MetricReport(
            bwr=float(batch_win_rate(totals, uniform_totals)),
            bwtr_curve=tuple(curve.tolist()),
            est=float(sequential_sum(curve)),
            wtr=float(np.mean(maxima >= uniform_max)),
            runs=cfg.runs,
            extra={"mean_total": float(totals.mean()),
                   "uniform_mean_total": float(uniform_totals.mean())})
    log.debug("batch %d (%s=%s) done", b, axis, value)
    return BatchResult(b, list(prompt_ids), cfg, reports, records, axis, value)


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("ADABON_THREADS", "0") or 0) or (os.cpu_count() or 1)
    return max(1, int(threads))


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> ExperimentResult:
    """Evaluate every configured policy, plus the uniform baseline, on shared
    reward matrices for every batch, run and sweep value."""
    pools = None
    if spec.source.get("kind") == "replay":
        pools = load_reward_log(spec.source["path"])
    jobs = []
    for axis, value, cfg in _sweep_configs(spec):
        universe, batches = _universe_and_batches(spec, cfg, pools)
        jobs.extend((cfg, b, ids, universe, axis, value) for b, ids in enumerate(batches))
    n = worker_count(threads)
    if n == 1:
        results = [_run_batch(spec, cfg, b, ids, uni, pools, ax, v)
                   for cfg, b, ids, uni, ax, v in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(
                lambda job: _run_batch(spec, job[0], job[1], job[2], job[3], pools, job[4], job[5]),
                jobs))
    return ExperimentResult(spec, results)


# ---------------------------------------------------------------- reports

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _groups(raw: Sequence[dict]):
    groups: dict[tuple, list[dict]] = {}
    for rec in raw:
        groups.setdefault((rec.get("axis"), rec.get("value"), rec["policy"]), []).append(rec)
    return groups


def summary_rows(raw: Sequence[dict]) -> list[dict]:
    """Median [Q1, Q3] of BWR, EST and WTR per (sweep value, policy)."""
    rows = []
    for (axis, value, policy), recs in _groups(raw).items():
        bwr = [r["bwr"] for r in recs]
        est = [r["est"] for r in recs]
        wtr = [r["wtr"] for r in recs]
        row = {"axis": axis, "value": value, "policy": policy, "n_batches": len(recs),
               "bwr_mean": float(np.mean(bwr)),
               "pct_bwr_gt_half": 100.0 * sum(x > 0.5 for x in bwr) / len(bwr)}
        for name, vals in (("bwr", bwr), ("est", est), ("wtr", wtr)):
            med, q1, q3 = quartile_summary(vals)
            row.update({f"{name}_median": med, f"{name}_q1": q1, f"{name}_q3": q3})
        rows.append(row)
    return rows


def series_rows(raw: Sequence[dict]) -> list[dict]:
    """Mean BWR and its standard error across batches per (sweep value, policy)."""
    rows = []
    for (axis, value, policy), recs in _groups(raw).items():
        bwr = np.array([r["bwr"] for r in recs])
        se = float(bwr.std(ddof=1) / math.sqrt(bwr.size)) if bwr.size > 1 else float("nan")
        rows.append({"axis": axis, "value": value, "policy": policy,
                     "n_batches": int(bwr.size), "mean_bwr": float(bwr.mean()), "se_bwr": se})
    return rows


def _write_csv(path: Path, rows: list[dict]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])


def emit_report(reports: Sequence[dict], fmt: str, path) -> Path:
    """Write per-batch raw records (``"raw"``, JSON lines), the quartile
    table (``"summary"``, CSV) or the sweep series (``"series"``, CSV)."""
    if not reports:
        raise ValueError("no reports to emit")
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    path = Path(path)
    if fmt == "raw":
        with open(path, "w", encoding="utf-8") as fh:
            for rec in reports:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    elif fmt == "summary":
        _write_csv(path, summary_rows(reports))
    else:
        _write_csv(path, series_rows(reports))
    return path


def write_lines(path, lines: Sequence[dict]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in lines:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path


def read_raw(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_outputs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """``batches.jsonl``, ``runs.jsonl``, ``summary.csv`` and ``series.csv`` in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw = result.raw_records()
    return {
        "raw": emit_report(raw, "raw", out / "batches.jsonl"),
        "runs": write_lines(out / "runs.jsonl", result.run_lines()),
        "summary": emit_report(raw, "summary", out / "summary.csv"),
        "series": emit_report(raw, "series", out / "series.csv"),
    }
