import csv
import json

import numpy as np
import pytest

from adabon import cli, harness
from adabon.core import BudgetConfig
from adabon.distributions import Bernoulli
from adabon.harness import (ExperimentSpec, build_batches, emit_report, read_raw,
                            run_experiment, write_outputs)
from adabon.oracle import simulate_policy_value


def _spec(**over):
    raw = {
        "config": {"per_prompt_budget": 6, "batch_size": 3, "exploration_budget": 3,
                   "mc_samples": 64, "runs": 20, "seed": 4},
        "source": {"kind": "synthetic"},
        "policies": [["adabon", "kde"], ["varbon"]],
        "n_batches": 4,
        "prompt_universe": {f"q{i}": {"family": "gaussian", "mu": 0.1 * i, "sigma": 0.5 + 0.1 * i}
                            for i in range(8)},
    }
    raw.update(over)
    return raw


def test_build_batches_distinct_and_reproducible():
    ids = [f"id{i}" for i in range(805)]
    a = build_batches(ids, 5, 50, seed=1)
    assert a == build_batches(ids, 5, 50, seed=1)
    assert a != build_batches(ids, 5, 50, seed=2)
    assert len(a) == 50 and all(len(set(b)) == 5 and set(b) <= set(ids) for b in a)


def test_build_batches_universe_of_exactly_k():
    b = build_batches(["a", "b", "c"], 3, 4, seed=0)
    assert all(sorted(x) == ["a", "b", "c"] for x in b)
    with pytest.raises(ValueError):
        build_batches(["a", "b"], 3, 1, seed=0)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict(_spec(policies=["greedy-ish"]))
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict(_spec(sweep={"axis": "d_fraction", "values": [1.2]}))
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict(_spec(sweep={"axis": "m", "values": [1]}))
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict(_spec(n_batches=0))


def test_uniform_against_itself():
    result = run_experiment(ExperimentSpec.from_dict(_spec(policies=["uniform"])), threads=1)
    B = result.spec.config.per_prompt_budget
    for br in result.batches:
        rep = br.reports["uniform"]
        assert rep.bwr == 0.5
        assert rep.wtr == 1.0
        assert all(x == 1.0 for x in rep.bwtr_curve[:B])
        assert rep.est >= B


def test_point_masses_tie_everywhere():
    universe = {f"c{i}": {"family": "point_mass", "value": float(i)} for i in range(4)}
    spec = ExperimentSpec.from_dict(_spec(prompt_universe=universe,
                                          policies=[["adabon", "kde"], ["varbon"]]))
    for br in run_experiment(spec, threads=1).batches:
        for rep in br.reports.values():
            assert rep.bwr == 0.5
            assert rep.bwtr_curve == (1.0,) * spec.config.est_cap
            assert rep.est == spec.config.est_cap


def test_outputs_identical_across_thread_counts(tmp_path):
    spec = ExperimentSpec.from_dict(_spec())
    write_outputs(run_experiment(spec, threads=1), tmp_path / "one")
    write_outputs(run_experiment(spec, threads=3), tmp_path / "three")
    for name in ("batches.jsonl", "runs.jsonl", "summary.csv", "series.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "three" / name).read_bytes()


def test_summary_matches_raw(tmp_path):
    paths = write_outputs(run_experiment(ExperimentSpec.from_dict(_spec()), threads=1), tmp_path)
    raw = read_raw(paths["raw"])
    with open(paths["summary"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        bwr = [r["bwr"] for r in raw if r["policy"] == row["policy"]]
        assert int(row["n_batches"]) == len(bwr)
        assert float(row["pct_bwr_gt_half"]) == 100.0 * sum(x > 0.5 for x in bwr) / len(bwr)
        assert float(row["bwr_median"]) == float(np.percentile(bwr, 50))
    assert {row["policy"] for row in rows} == {"uniform", "adabon[kde]", "varbon"}


def test_runs_file_recomputes_totals(tmp_path):
    paths = write_outputs(run_experiment(ExperimentSpec.from_dict(_spec()), threads=1), tmp_path)
    for line in read_raw(paths["runs"]):
        assert sum(line["allocation"]) == 6 * 3
        assert line["total"] == float(np.cumsum(line["per_prompt_max"])[-1])


def test_emit_report_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], "summary", tmp_path / "x.csv")
    with pytest.raises(ValueError):
        emit_report([{"policy": "u", "bwr": 0.5, "est": 1.0, "wtr": 1.0}], "xml", tmp_path / "x")


def test_sweep_over_k(tmp_path):
    spec = ExperimentSpec.from_dict(_spec(policies=[["adabon", "kde"]], n_batches=2,
                                          sweep={"axis": "K", "values": [2, 3]}))
    result = run_experiment(spec, threads=1)
    assert [len(br.prompts) for br in result.batches] == [2, 2, 3, 3]
    series = harness.series_rows(result.raw_records())
    adabon = [r for r in series if r["policy"] == "adabon[kde]"]
    assert [r["value"] for r in adabon] == [2, 3]


def test_sweep_over_b_and_d_fraction():
    spec = ExperimentSpec.from_dict(_spec(policies=["uniform"], n_batches=1,
                                          sweep={"axis": "B", "values": [4, 10]}))
    cfgs = [br.config for br in run_experiment(spec, threads=1).batches]
    assert [(c.B, c.d, c.est_cap) for c in cfgs] == [(4, 2, 8), (10, 5, 20)]
    spec = ExperimentSpec.from_dict(_spec(policies=["uniform"], n_batches=1,
                                          sweep={"axis": "d_fraction", "values": [0.25, 0.75]}))
    assert [br.config.d for br in run_experiment(spec, threads=1).batches] == [2, 5]


def test_replay_experiment(tmp_path):
    rng = np.random.default_rng(0)
    log = tmp_path / "log.jsonl"
    log.write_text("".join(json.dumps({"prompt_id": f"r{i}", "rewards": rng.normal(size=40).tolist()})
                           + "\n" for i in range(5)))
    raw = _spec(source={"kind": "replay", "path": "log.jsonl"}, prompt_universe=None)
    (tmp_path / "cfg.json").write_text(json.dumps(raw))
    spec = ExperimentSpec.load(tmp_path / "cfg.json")
    result = run_experiment(spec, threads=1)
    assert len(result.batches) == 4
    assert all(set(br.prompts) <= {f"r{i}" for i in range(5)} for br in result.batches)


def test_generator_universe():
    spec = ExperimentSpec.from_dict(_spec(
        prompt_universe={"generator": "mixture_vs_point_mass"}, n_batches=2,
        policies=[["adabon", "kde"]]))
    result = run_experiment(spec, threads=1)
    assert [br.prompts for br in result.batches] == [
        [f"b{b:03d}-p{i:02d}" for i in range(3)] for b in range(2)]


def test_bernoulli_batch_matches_direct_simulation():
    # one batch of the Bernoulli pair, empirical estimator, against the oracle simulator
    cfg = dict(per_prompt_budget=25, batch_size=2, exploration_budget=10,
               mc_samples=64, runs=400, seed=11)
    spec = ExperimentSpec.from_dict({
        "config": cfg, "policies": [["adabon", "empirical"]], "n_batches": 1,
        "prompt_universe": {"x": {"family": "bernoulli", "p": 0.05},
                            "y": {"family": "bernoulli", "p": 0.95}},
        "batches": [["x", "y"]]})
    br = run_experiment(spec, threads=1).batches[0]
    mean = br.reports["adabon[empirical]"].extra["mean_total"]
    ref, se = simulate_policy_value("adabon", [Bernoulli(0.05), Bernoulli(0.95)],
                                    BudgetConfig(**cfg), seed=12)
    assert abs(mean - ref) < 4 * se * np.sqrt(2)


# ---------------------------------------------------------------- CLI

def test_cli_oracle(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({"p": [0.05, 0.95], "B": 25, "d": 10}))
    assert cli.main(["oracle", "--instance", str(inst)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["uniform"] == pytest.approx(1.72261, abs=1e-5)
    assert out["two_stage"] == pytest.approx(1.87149, abs=1e-5)


def test_cli_batches(tmp_path):
    uni = tmp_path / "u.json"
    uni.write_text(json.dumps([f"p{i}" for i in range(10)]))
    out = tmp_path / "b.json"
    assert cli.main(["batches", "--universe", str(uni), "--k", "4", "--n", "3",
                     "--seed", "2", "--out", str(out)]) == 0
    batches = json.loads(out.read_text())
    assert batches == build_batches([f"p{i}" for i in range(10)], 4, 3, 2)


def test_cli_simulate_and_metrics(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(_spec()))
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o"),
                     "--threads", "2"]) == 0
    assert cli.main(["metrics", "--raw", str(tmp_path / "o" / "batches.jsonl"),
                     "--out", str(tmp_path / "m")]) == 0
    assert ((tmp_path / "o" / "summary.csv").read_bytes()
            == (tmp_path / "m" / "summary.csv").read_bytes())


def test_cli_reports_errors(tmp_path, capsys):
    assert cli.main(["oracle", "--instance", str(tmp_path / "missing.json")]) == 2
    assert "error" in capsys.readouterr().err
