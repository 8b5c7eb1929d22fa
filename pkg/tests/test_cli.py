import csv
import json
import re
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import pytest

from mcas.cli import SUMMARY_FIELDS, main, to_dot
from mcas.gallium import build_toy
from mcas.scenario import save_scenario_file

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
GALLIUM = str(SCENARIOS / "gallium.json")
TOY = str(SCENARIOS / "toy.json")


def test_validate_ok(capsys):
    assert main(["validate", GALLIUM]) == 0
    assert "ok: gallium" in capsys.readouterr().out


def test_validate_parse_failure(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("{}")
    assert main(["validate", str(p)]) == 2
    p.write_text("not json")
    assert main(["validate", str(p)]) == 2


def test_validate_dangling_ref(tmp_path, capsys):
    toy = build_toy()
    bad = replace(toy, agents=(replace(toy.agents[0], home_node="mars"),))
    p = tmp_path / "bad.json"
    save_scenario_file(bad, p)
    assert main(["validate", str(p)]) == 1
    out = capsys.readouterr().out
    assert "dangling-node-ref" in out and "/agents/0/node" in out


def test_run_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", GALLIUM, "--episodes", "10", "--defenders", "passive", "--out", str(out)]) == 0
    assert "1.0000" in capsys.readouterr().out
    rows = list(csv.DictReader((out / "summary.csv").open()))
    assert len(rows) == 10
    assert tuple(rows[0]) == SUMMARY_FIELDS
    assert all(r["attacker_path_length"] == "16" for r in rows)
    records = [json.loads(line) for line in (out / "episodes.jsonl").read_text().splitlines()]
    assert {r["episode"] for r in records} == set(range(10))


def test_run_active_defenders(tmp_path, capsys):
    assert main(["run", GALLIUM, "--episodes", "3", "--out", str(tmp_path)]) == 0
    assert "0.0000" in capsys.readouterr().out


def test_run_zero_cycles(tmp_path):
    p = tmp_path / "zero.json"
    save_scenario_file(replace(build_toy(), max_cycles=0), p)
    assert main(["run", str(p), "--episodes", "4", "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.DictReader((tmp_path / "o" / "summary.csv").open()))
    assert [r["status"] for r in rows] == ["max_cycles_reached"] * 4
    assert (tmp_path / "o" / "episodes.jsonl").read_text() == ""


def test_run_rejects_zero_episodes(tmp_path):
    assert main(["run", TOY, "--episodes", "0", "--out", str(tmp_path)]) == 1


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["run", TOY, "--episodes", "50", "--seed", "9", "--out", str(d)]) == 0
    for name in ("episodes.jsonl", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_train_outputs(tmp_path):
    p = tmp_path / "toy_q.json"
    save_scenario_file(build_toy(behavior="qlearning"), p)
    out = tmp_path / "t"
    assert main(["train", str(p), "--phases", "attackers:30", "--out", str(out)]) == 0
    lines = (out / "curves.csv").read_text().splitlines()
    assert lines[0] == "episode,agent,return,path_length,success"
    assert len(lines) == 31
    tables = json.loads((out / "qtables.json").read_text())
    assert set(tables["tables"]) == {"attacker"}
    assert main(["run", str(p), "--episodes", "3", "--qtables", str(out / "qtables.json"),
                 "--out", str(tmp_path / "r")]) == 0


def test_train_zero_episodes_writes_header(tmp_path):
    p = tmp_path / "toy_q.json"
    save_scenario_file(build_toy(behavior="qlearning"), p)
    assert main(["train", str(p), "--phases", "attackers:0", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "curves.csv").read_text() == "episode,agent,return,path_length,success\n"


def test_train_needs_learners(tmp_path):
    assert main(["train", TOY, "--phases", "attackers:1", "--out", str(tmp_path)]) == 1


def test_train_bad_phases(tmp_path):
    p = tmp_path / "toy_q.json"
    save_scenario_file(build_toy(behavior="qlearning"), p)
    assert main(["train", str(p), "--phases", "martians:3", "--out", str(tmp_path)]) == 1


def test_graph_gallium(tmp_path):
    out = tmp_path / "g.dot"
    assert main(["graph", GALLIUM, "--out", str(out)]) == 0
    text = out.read_text()
    nodes = re.findall(r'^\s+"[^"]+";$', text, re.M)
    assert len(nodes) == 15
    assert len(re.findall(r"subgraph cluster_", text)) == 5
    assert main(["graph", GALLIUM, "--out", str(tmp_path / "g2.dot")]) == 0
    assert (tmp_path / "g2.dot").read_text() == text


def test_graph_toy():
    text = to_dot(build_toy())
    assert len(re.findall(r'^\s+"[^"]+";$', text, re.M)) == 2
    assert '"gw" -- "srv";' in text


def test_shortest_path_cli(capsys):
    assert main(["shortest-path", GALLIUM]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "16" and len(lines) == 17


def test_shortest_path_budget(capsys):
    assert main(["shortest-path", GALLIUM, "--budget", "3"]) == 3
    assert capsys.readouterr().out.startswith("unknown")


def test_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) in (1, 2)


@pytest.mark.parametrize("argv", [["-m", "mcas", "validate", TOY]])
def test_module_entry_point(argv):
    proc = subprocess.run([sys.executable, *argv], capture_output=True, text=True)
    assert proc.returncode == 0 and "ok: toy" in proc.stdout
