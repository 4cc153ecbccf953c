import json
import os
import pathlib

import pytest

import ttx

SOURCE = pathlib.Path(os.environ.get("TTX_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
DEMO = SOURCE / "scenarios" / "demo"


def demo_text():
    return (DEMO / "definition.yaml").read_text()


def test_validate_demo():
    report = ttx.validate(demo_text())
    assert report["ok"]
    assert report["errors"] == []
    assert report["summary"]["milestones"] == 22
    assert report["summary"]["tools"] == 11


def test_validate_reports_dangling_reference():
    text = """
exercise: {name: Bad, duration_minutes: 30}
injects:
  - {id: start, body: Go, trigger: {type: after_milestone, milestone: m_nonexistent, delay_minutes: 1}}
"""
    report = ttx.validate(text)
    assert not report["ok"]
    assert any("m_nonexistent" in e["message"] for e in report["errors"])
    assert all(e["line"] is not None for e in report["errors"])


def test_normalize_round_trips():
    once = ttx.normalize(demo_text())
    assert ttx.normalize(once) == once
    with pytest.raises(ttx.TtxError):
        ttx.normalize("exercise: [")


def test_simulate_is_deterministic(tmp_path):
    script = (DEMO / "three_teams.yaml").read_text()
    first = ttx.simulate(demo_text(), script, output_dir=tmp_path / "a")
    second = ttx.simulate(demo_text(), script, output_dir=tmp_path / "b")
    assert first == second
    assert [t["team_id"] for t in first["teams"]] == ["alpha", "bravo", "charlie"]
    for team in first["teams"]:
        for name in ttx.STREAM_FILES:
            a = (tmp_path / "a" / team["team_id"] / name).read_bytes()
            b = (tmp_path / "b" / team["team_id"] / name).read_bytes()
            assert a == b


def test_solution_reaches_everything(tmp_path):
    result = ttx.simulate(demo_text(), (DEMO / "solution.yaml").read_text(), output_dir=tmp_path)
    assert result["teams"][0]["missed"] == []
    assert len(result["teams"][0]["reached"]) == 22
    lines = (tmp_path / "solution" / "milestones.jsonl").read_text().splitlines()
    assert len(lines) == 22
    for line in lines:
        ts = json.loads(line)["timestamp"]
        assert ttx.format_timestamp(ttx.parse_timestamp(ts)) == ts


def test_keep_going_collects_failures():
    script = "teams:\n  a:\n    - {at: 1, invoke: restore_backup, args: {date: 2024-01-01}}\n"
    with pytest.raises(ttx.TtxError):
        ttx.simulate(demo_text(), script)
    result = ttx.simulate(demo_text(), script, keep_going=True)
    assert len(result["failed_steps"]) == 1
    assert "line 3" in result["failed_steps"][0]


def test_report_over_simulated_logs(tmp_path):
    ttx.simulate(demo_text(), (DEMO / "three_teams.yaml").read_text(), output_dir=tmp_path)
    dirs = sorted(p for p in tmp_path.iterdir() if p.is_dir())
    report = ttx.report(demo_text(), dirs)
    assert report["team_count"] == 3
    assert report["defined_milestones"] == 22
    reached = {t["team_id"]: t["milestones_reached"] for t in report["teams"]}
    mean = sum(reached.values()) / 3
    assert report["mean_milestones_reached"] == pytest.approx(mean)
    assert report["below_average_teams"] == sorted(t for t, n in reached.items() if n < mean)


def test_statistics():
    assert ttx.completion_ratio(10, 14)["percent"] == 71
    assert ttx.completion_ratio(8, 14)["percent"] == 57
    assert ttx.rounded_percent(1, 8) == 13
    stats = ttx.timing_stats([8, 15, 30], 3)
    assert stats["min"] == 8 and stats["max"] == 30
    assert stats["mean"] == pytest.approx(17.67, abs=0.01)
    assert ttx.timing_stats([], 2)["mean"] is None
    with pytest.raises(ttx.TtxError):
        ttx.completion_ratio(1, 0)


def test_catalog_and_timestamps():
    assert "dns_lookup" in ttx.tool_catalog()
    assert ttx.format_timestamp(0) == "1970-01-01T00:00:00.000000Z"
    assert ttx.parse_timestamp("2024-01-01T09:00:00Z") is None
