import json

import pytest

from d3forge.cli import main
from d3forge.storage import read_dataset


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1])


def test_gen_questions_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    code, summary = run(capsys, "gen-questions", "--set", "2Hop-A", "--budget", 150, "--seed", 9, "--out", a,
                        "--scenes-out", tmp_path / "s.jsonl")
    assert code == 0 and summary["records"] == 150
    assert run(capsys, "gen-questions", "--set", "2Hop-A", "--budget", 150, "--seed", 9, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    run(capsys, "gen-questions", "--set", "2Hop-A", "--budget", 150, "--seed", 10, "--out", b)
    assert a.read_bytes() != b.read_bytes()


def test_env_seed(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    run(capsys, "gen-scenes", "--n", 5, "--seed", 42, "--out", a)
    monkeypatch.setenv("D3FORGE_SEED", "42")
    run(capsys, "gen-scenes", "--n", 5, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_gen_from_scene_file(tmp_path, capsys):
    scenes = tmp_path / "s.jsonl"
    assert run(capsys, "gen-scenes", "--n", 120, "--condition", "A", "--max-objects", 10, "--out", scenes)[0] == 0
    code, summary = run(capsys, "gen-questions", "--set", "0Hop-A", "--budget", 60, "--scenes", scenes,
                        "--out", tmp_path / "q.jsonl")
    assert code == 0 and summary["scenes"] == 120


def test_mix_d3_and_audit(tmp_path, capsys):
    base, d3, out = tmp_path / "base.jsonl", tmp_path / "d3.jsonl", tmp_path / "mix.jsonl"
    run(capsys, "gen-questions", "--set", "2Hop-A", "--budget", 200, "--out", base)
    run(capsys, "gen-questions", "--set", "1Hop-Full", "--budget", 100, "--out", d3)
    code, summary = run(capsys, "mix-d3", "--base", base, "--d3", d3, "--proportion", "3/10", "--out", out)
    assert code == 0 and summary["provenance"] == {"2Hop-A": 140, "1Hop-Full": 60}
    assert len(read_dataset(out)) == 200
    code, summary = run(capsys, "audit", "--data", base, "--set", "2Hop-A", "--strict")
    assert code == 0 and summary["violations"] == 0
    code, summary = run(capsys, "audit", "--data", out, "--set", "2Hop-A", "--strict")
    assert code == 2 and summary["type"] == "DataError"
    code, summary = run(capsys, "mix-d3", "--base", base, "--d3", d3, "--proportion", "9/10", "--out", out)
    assert code == 3 and summary["type"] == "InsufficientSourceError"


def test_mix_fractions(tmp_path, capsys):
    pools = {}
    for name in ("0Hop-A", "1Hop-A"):
        pools[name] = tmp_path / f"{name}.jsonl"
        run(capsys, "gen-questions", "--set", name, "--budget", 60, "--out", pools[name])
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps({"total": 90, "seed": 1, "sources": [
        {"name": "0Hop-A", "fraction": "1/3"}, {"name": "1Hop-A", "fraction": "2/3"}]}))
    args = ["mix-fractions", "--plan", plan, "--pool", f"0Hop-A={pools['0Hop-A']}",
            "--pool", f"1Hop-A={pools['1Hop-A']}", "--out", tmp_path / "m.jsonl"]
    code, summary = run(capsys, *args)
    assert code == 0 and summary["provenance"] == {"0Hop-A": 30, "1Hop-A": 60}
    code, summary = run(capsys, *args[:5], "--out", tmp_path / "m.jsonl")
    assert code == 3


def test_grid(tmp_path, capsys):
    code, summary = run(capsys, "grid", "--k", 3, "--step", "1/6")
    assert code == 0 and summary["vectors"] == 28 and summary["grid"][0] == ["0", "0", "1"]
    out = tmp_path / "g.jsonl"
    run(capsys, "grid", "--k", 2, "--step", "1/2", "--out", out)
    assert out.read_text() == '["0","1"]\n["1/2","1/2"]\n["1","0"]\n'
    assert run(capsys, "grid", "--k", 3, "--step", "2/5")[0] == 1


def test_split_length(tmp_path, capsys):
    data = tmp_path / "d.jsonl"
    run(capsys, "gen-questions", "--set", "1Hop-Full", "--budget", 80, "--out", data)
    code, summary = run(capsys, "split-length", "--data", data, "--out-dir", tmp_path / "split")
    assert code == 0
    assert summary["short"] + summary["base"] + summary["long"] + summary["out_of_band"] == 80
    assert len(read_dataset(tmp_path / "split" / "long.jsonl")) == summary["long"]


def test_eval_and_heatmap(tmp_path, capsys):
    gold = tmp_path / "g.jsonl"
    run(capsys, "gen-questions", "--set", "0Hop-A", "--budget", 50, "--out", gold)
    records = read_dataset(gold)
    pred = tmp_path / "p.jsonl"
    pred.write_text("".join(json.dumps({"question_id": r.id, "answer": "yes"}) + "\n" for r in records[:40]))
    code, summary = run(capsys, "eval", "--gold", gold, "--pred", pred, "--out-dir", tmp_path / "base")
    assert code == 0 and summary["n"] == 50 and summary["missing"] == 10
    report = json.loads((tmp_path / "base" / "report.json").read_text())
    assert report["missing_predictions"] == 10
    assert (tmp_path / "base" / "report.csv").read_text().startswith("set,name,n,accuracy\n")
    lenient = run(capsys, "eval", "--gold", gold, "--pred", pred, "--lenient", "--out-dir", tmp_path / "len")[1]
    assert lenient["n"] == 40
    out = tmp_path / "h.csv"
    code, summary = run(capsys, "heatmap", "--base", tmp_path / "base" / "report.json",
                        "--variant", f"same={tmp_path / 'base' / 'report.json'}", "--out", out)
    assert code == 0 and out.read_text() == "d3_set,0Hop-A\nsame,+0.00\n"


def test_oracle_check(capsys):
    code, summary = run(capsys, "oracle-check", "--n", 50, "--seed", 1)
    assert code == 0 and summary["mismatches"] == 0 and summary["pairs"] >= 200


@pytest.mark.parametrize("argv, code", [
    (["bogus"], 1),
    (["grid", "--k", "3"], 1),
    (["gen-questions", "--set", "NoSuchSet", "--budget", "5", "--out", "x.jsonl"], 1),
    (["mix-d3", "--base", "missing.jsonl", "--d3", "x", "--proportion", "1/2", "--out", "o"], 1),
])
def test_usage_errors(tmp_path, monkeypatch, capsys, argv, code):
    monkeypatch.chdir(tmp_path)
    assert run(capsys, *argv)[0] == code


def test_config_validation(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bands": [0.4, 0.6]}))
    code, summary = run(capsys, "gen-questions", "--set", "0Hop-A", "--budget", 5, "--config", cfg,
                        "--out", tmp_path / "q.jsonl")
    assert code == 1 and "bands" in summary["error"]
    cfg.write_text(json.dumps({"scene": {"min_objcts": 3}}))
    assert run(capsys, "gen-questions", "--set", "0Hop-A", "--budget", 5, "--config", cfg,
               "--out", tmp_path / "q.jsonl")[0] == 1
    cfg.write_text("{not json")
    assert run(capsys, "gen-questions", "--set", "0Hop-A", "--budget", 5, "--config", cfg,
               "--out", tmp_path / "q.jsonl")[0] == 2
