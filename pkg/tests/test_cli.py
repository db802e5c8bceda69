import json

import pytest

from conftest import tiny_plant
from cosched.cli import app
from cosched.cli.app import GAMMA_SWEEP, run_cli
from cosched.errors import InfeasibleInstance
from cosched.factory import dump_factory
from cosched.i18n.localization import localization
from cosched.utils.util import read_json, read_jsonl


@pytest.fixture
def generated(tmp_path):
    out = tmp_path / "gen"
    assert run_cli(["generate", "--seed", "7", "--out", str(out)]) == 0
    return out


def _fit(generated, tmp_path):
    fit_dir = tmp_path / "fit"
    argv = ["fit", str(generated / "instance.json"), "--history", str(generated / "history"), "--out", str(fit_dir)]
    assert run_cli(argv) == 0
    return fit_dir / "ddu.json"


def _solve(instance, ddu, out, *extra):
    return run_cli(["solve", str(instance), "--ddu", str(ddu), "--no-timing", "--out", str(out), *extra])


class TestPipeline:
    def test_generate_writes_instance_and_history(self, generated):
        assert (generated / "instance.json").is_file()
        assert (generated / "history" / "loads.csv").is_file()
        planted = read_json(generated / "planted.json")
        assert planted["horizon"] == 2
        assert len(planted["active"]) == 4

    def test_validate(self, generated, tmp_path, capsys):
        assert run_cli(["validate", str(generated / "instance.json"), "--out", str(tmp_path / "val")]) == 0
        assert read_json(tmp_path / "val" / "diagnostics.json") == []
        printed = capsys.readouterr().out
        assert "Real-time price: ok" in printed
        assert "Instance is valid" in printed

    def test_solve_matches_oracle(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        instance = generated / "instance.json"
        assert _solve(instance, ddu, tmp_path / "run") == 0
        schedule = read_json(tmp_path / "run" / "schedule.json")
        trace = read_jsonl(tmp_path / "run" / "trace.jsonl")
        assert trace[-1]["cut_kind"] is None
        assert all(record["elapsed_ms"] == 0 for record in trace)

        argv = ["oracle", str(instance), "--ddu", str(ddu), "--out", str(tmp_path / "oracle")]
        assert run_cli(argv) == 0
        oracle = read_json(tmp_path / "oracle" / "oracle.json")
        assert abs(schedule["robust_objective"] - oracle["value"]) <= 1e-5

    def test_reruns_are_byte_identical(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        instance = generated / "instance.json"
        assert _solve(instance, ddu, tmp_path / "a") == 0
        assert _solve(instance, ddu, tmp_path / "b") == 0
        for name in ("schedule.json", "trace.jsonl", "report.json", "report.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_simulate_evaluate_report(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        instance = str(generated / "instance.json")
        run_dir = tmp_path / "run"
        assert _solve(instance, ddu, run_dir) == 0
        schedule = run_dir / "schedule.json"

        assert run_cli(["simulate", instance, "--schedule", str(schedule), "--out", str(tmp_path / "sim")]) == 0
        simulated = read_json(tmp_path / "sim" / "simulate.json")
        assert abs(simulated["objective"] - read_json(schedule)["objective"]) <= 1e-9

        evaluate = ["evaluate", instance, "--ddu", str(ddu), "--schedule", str(schedule), "-n", "50", "--seed", "3"]
        assert run_cli([*evaluate, "--out", str(run_dir)]) == 0
        assert run_cli([*evaluate, "--out", str(tmp_path / "again")]) == 0
        assert (run_dir / "summary.json").read_bytes() == (tmp_path / "again" / "summary.json").read_bytes()

        assert run_cli(["report", str(run_dir), "--out", str(tmp_path / "report")]) == 0
        report = read_json(tmp_path / "report" / "report.json")
        assert list(report["runs"]) == ["run"]
        assert report["runs"]["run"]["summary"]["n"] == 50
        assert report["columns"] == ["Run", "Power Cost", "Main Products", "By-products", "Objective"]
        csv = (tmp_path / "report" / "consumption.csv").read_text(encoding="utf-8")
        assert csv.splitlines()[0] == "hour,run"

    def test_report_keeps_runs_with_the_same_name(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        instance = generated / "instance.json"
        assert _solve(instance, ddu, tmp_path / "a" / "run") == 0
        assert _solve(instance, ddu, tmp_path / "b" / "run", "--corners", "greedy") == 0
        runs = [str(tmp_path / "a" / "run"), str(tmp_path / "b" / "run")]
        assert run_cli(["report", *runs, "--out", str(tmp_path / "report")]) == 0
        report = read_json(tmp_path / "report" / "report.json")
        assert list(report["runs"]) == ["a/run", "b/run"]
        csv = (tmp_path / "report" / "consumption.csv").read_text(encoding="utf-8")
        assert csv.splitlines()[0] == "hour,a/run,b/run"
        assert run_cli(["report", runs[0], runs[0], "--out", str(tmp_path / "twice")]) == 2

    def test_report_in_danish(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        run_dir = tmp_path / "run"
        assert _solve(generated / "instance.json", ddu, run_dir) == 0
        try:
            assert run_cli(["--lang", "da", "report", str(run_dir), "--out", str(tmp_path / "report")]) == 0
            report = read_json(tmp_path / "report" / "report.json")
            assert report["columns"][0] == "Kørsel"
        finally:
            localization.set_language("en")
        assert run_cli(["--lang", "fr", "report", str(run_dir), "--out", str(tmp_path / "fr")]) == 2

    def test_gamma_sweep(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        assert _solve(generated / "instance.json", ddu, tmp_path / "sweep", "--sweep") == 0
        dirs = sorted(p.name for p in (tmp_path / "sweep").iterdir())
        assert dirs == sorted(f"gamma_{g:g}" for g in GAMMA_SWEEP)
        assert dirs == ["gamma_0.01", "gamma_0.02", "gamma_0.05", "gamma_0.1"]
        for name in dirs:
            assert (tmp_path / "sweep" / name / "schedule.json").is_file()


class TestExitCodes:
    def test_invalid_instance(self, tmp_path, capsys):
        doc = dump_factory(tiny_plant())
        doc["energy"]["rtp"] = [1.0]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        assert run_cli(["validate", str(path), "--out", str(tmp_path / "val")]) == 2
        diagnostics = read_json(tmp_path / "val" / "diagnostics.json")
        assert [d["check"] for d in diagnostics] == ["rtp"]
        assert "Real-time price: failed" in capsys.readouterr().out
        assert run_cli(["solve", str(path), "--out", str(tmp_path / "run")]) == 2

    def test_missing_file(self, tmp_path):
        assert run_cli(["solve", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2

    def test_bad_flag_value(self, tmp_path):
        assert run_cli(["solve", "engine", "--epsilon", "0", "--out", str(tmp_path)]) == 2
        assert run_cli(["solve", "engine", "--gamma", "1.5", "--out", str(tmp_path)]) == 2

    def test_unknown_command(self):
        assert run_cli(["dance"]) == 2

    def test_report_without_results(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run_cli(["report", str(empty), "--out", str(tmp_path / "report")]) == 2

    def test_iteration_limit(self, generated, tmp_path):
        ddu = _fit(generated, tmp_path)
        assert _solve(generated / "instance.json", ddu, tmp_path / "run", "--max-iters", "1") == 4
        assert (tmp_path / "run" / "schedule.json").is_file()
        assert len(read_jsonl(tmp_path / "run" / "trace.jsonl")) == 1

    def test_infeasible(self, generated, tmp_path, monkeypatch):
        def infeasible(*args, **kwargs):
            raise InfeasibleInstance("master problem infeasible at iteration 0")

        monkeypatch.setattr(app, "run", infeasible)
        assert run_cli(["solve", str(generated / "instance.json"), "--out", str(tmp_path / "run")]) == 3

    def test_oracle_size_limit(self, tmp_path):
        assert run_cli(["oracle", "engine", "--out", str(tmp_path)]) == 4

    def test_internal_error(self, generated, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            raise RuntimeError("boom")

        monkeypatch.setattr(app, "run", broken)
        assert run_cli(["solve", str(generated / "instance.json"), "--out", str(tmp_path / "run")]) == 5
