import json
import os
from pathlib import Path

import pytest

import craftplan

FIXTURES = Path(os.environ["CRAFTPLAN_FIXTURES"])


def rstrip_lines(text):
    lines = [line.rstrip() for line in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    return lines


def test_graph_loads_and_verbalizes():
    g = craftplan.load_graph(FIXTURES / "crafter_graph.json")
    assert len(g.node_ids()) == 22
    assert craftplan.graph_findings(g) == []
    want = rstrip_lines((FIXTURES / "appendix_graph.txt").read_text())
    assert rstrip_lines(g.verbalize()) == want

    back = craftplan.Graph.from_verbalized(g.verbalize(weights=True))
    assert back.node_ids() == g.node_ids()
    assert craftplan.graph_dict(g)["subgoals"][0]["id"] == g.node_ids()[0]


def test_gridcraft_steps():
    env = craftplan.GridCraft()
    obs = env.reset(7)
    lines = obs.splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("You see:")
    assert lines[2].startswith("Vitals: health 9")

    obs2, reward, done, unlocked = env.step("noop")
    assert isinstance(reward, float)
    assert done is False
    assert unlocked == []
    assert obs2.splitlines()[0].startswith("You see:")

    flags = env.achievements()
    assert len(flags) == 22
    assert not any(flags.values())

    assert len(craftplan.GridCraft.action_names()) == 17
    assert craftplan.GridCraft.achievement_names() == sorted(
        craftplan.GridCraft.achievement_names()
    )

    with pytest.raises(craftplan.CraftplanError):
        craftplan.GridCraft().step("noop")  # step before reset


def test_score_and_fingerprint():
    assert craftplan.score([0.0] * 22) == 0.0
    assert craftplan.score([100.0] * 22) == 100.0
    with pytest.raises(craftplan.CraftplanError):
        craftplan.score([])

    fp = craftplan.fingerprint("actor", "hello")
    assert len(fp) == 16
    int(fp, 16)  # hex
    assert fp == craftplan.fingerprint("actor", "hello")
    assert fp != craftplan.fingerprint("critic", "hello")


def test_run_and_summarize(tmp_path):
    metrics = craftplan.run(
        FIXTURES / "configs" / "run_smoke.json", steps=600, out_dir=tmp_path
    )
    assert metrics["type"] == "metrics"
    assert metrics["total_steps"] == 600
    assert len(metrics["success_rates"]) == 22
    assert 0.0 <= metrics["score"] <= 100.0

    runlog = tmp_path / "runlog.jsonl"
    assert runlog.exists()
    first = json.loads(runlog.read_text().splitlines()[0])
    assert first["type"] == "replan"
    assert first["reason"] == "interval"

    summary = craftplan.summarize([runlog])
    assert summary["episodes"] >= 1
    assert "score" in summary
