import json

import pytest

from navsim.bench import (
    BenchError,
    SUITES,
    Suite,
    fps_bench,
    load_suite,
    main,
    make_policy,
    run_suite,
)
from navsim.goals import PointGoal
from navsim.sensors import SensorSpec

TINY = Suite(name="tiny-empty", n_rooms=1, furnished=False, n_scenes=3,
             scene_seed=1000, max_steps=120)
TINY_FURNISHED = Suite(name="tiny-furnished", n_rooms=1, furnished=True,
                       n_scenes=3, scene_seed=1000, max_steps=120)


def test_known_suites_registered():
    assert set(SUITES) == {"empty-small", "empty-medium",
                           "furnished-small", "furnished-medium"}
    assert SUITES["empty-small"].n_rooms == 1
    assert SUITES["furnished-medium"].furnished
    # Small/furnished-small share scene seeds: same layouts, clutter added.
    assert SUITES["empty-small"].scene_seed == SUITES["furnished-small"].scene_seed


def test_policies_emit_known_actions(one_room_house):
    from navsim.task import EpisodeConfig, Simulation
    from navsim.bench import BENCH_SENSORS, POLICY_ACTIONS

    sim = Simulation(one_room_house, sensor_specs=BENCH_SENSORS,
                     episode=EpisodeConfig(goal=PointGoal(), max_steps=30))
    obs = sim.reset(0)
    for kind in ("random", "greedy", "forward_bump"):
        policy = make_policy(kind, seed=1)
        for _ in range(10):
            assert policy.act(obs) in POLICY_ACTIONS


def test_unknown_policy_rejected():
    with pytest.raises(BenchError):
        make_policy("astar", seed=0)
    with pytest.raises(BenchError):
        run_suite(TINY, "astar")


def test_zero_episode_suite_rejected():
    with pytest.raises(BenchError):
        run_suite(TINY, "random", episodes_per_scene=0)


def test_report_rows_deterministic():
    a = run_suite(TINY, "random", episodes_per_scene=2, seed=5)
    b = run_suite(TINY, "random", episodes_per_scene=2, seed=5)
    assert a.rows == b.rows
    c = run_suite(TINY, "random", episodes_per_scene=2, seed=6)
    assert a.rows != c.rows or a.runtime["steps"] != c.runtime["steps"]


def test_greedy_beats_random_on_tiny_empty_suite():
    random_report = run_suite(TINY, "random", episodes_per_scene=4, seed=3)
    greedy_report = run_suite(TINY, "greedy", episodes_per_scene=4, seed=3)
    assert greedy_report.rows[0]["success"] > random_report.rows[0]["success"]


def test_greedy_near_perfect_in_empty_rooms():
    report = run_suite(TINY, "greedy", episodes_per_scene=4, seed=1)
    assert report.rows[0]["success"] >= 90.0


def test_forward_bump_runs(one_room_house):
    report = run_suite(TINY_FURNISHED, "forward_bump", episodes_per_scene=2, seed=2)
    assert report.rows[0]["episodes"] > 0
    assert 0.0 <= report.rows[0]["success"] <= 100.0
    assert 0.0 <= report.rows[0]["speed"] <= 100.0


def test_report_table_renders():
    report = run_suite(TINY, "random", episodes_per_scene=1, seed=0)
    text = report.table()
    assert "tiny-empty" in text
    assert "random" in text
    assert "steps/s" in text


def test_load_suite_by_name_and_file(tmp_path):
    assert load_suite("empty-small") is SUITES["empty-small"]
    doc = {"name": "custom", "n_rooms": 2, "furnished": False, "n_scenes": 4,
           "scene_seed": 77, "goal": {"type": "point"}, "max_steps": 200,
           "min_path_dist": 1.5}
    path = tmp_path / "custom.suite.json"
    path.write_text(json.dumps(doc))
    suite = load_suite(str(path))
    assert suite.name == "custom"
    assert suite.n_rooms == 2
    assert suite.min_path_dist == 1.5


def test_fps_bench_minimum_steps():
    with pytest.raises(BenchError):
        fps_bench((SensorSpec(name="m", kind="measurements"),), 10)


def test_fps_bench_runs_small():
    specs = (SensorSpec(name="contact", kind="contact"),
             SensorSpec(name="m", kind="measurements"))
    rate = fps_bench(specs, 1000, warmup=50)
    assert rate > 100


def test_cli_run_and_fps(tmp_path, capsys):
    doc = {"name": "cli-suite", "n_rooms": 1, "furnished": False, "n_scenes": 2,
           "scene_seed": 1000, "max_steps": 60}
    suite_path = tmp_path / "s.json"
    suite_path.write_text(json.dumps(doc))
    out_path = tmp_path / "report.json"
    records_path = tmp_path / "episodes.jsonl"
    rc = main(["run", "--suite", str(suite_path), "--policy", "greedy",
               "--episodes", "2", "--seed", "1", "--out", str(out_path),
               "--records", str(records_path)])
    assert rc == 0
    report = json.loads(out_path.read_text())
    assert report["rows"][0]["policy"] == "greedy"
    assert "cli-suite" in capsys.readouterr().out
    records = [json.loads(line) for line in
               records_path.read_text().strip().split("\n")]
    assert len(records) == report["rows"][0]["episodes"]
    assert set(records[0]) == {"scene", "seed", "goal", "success", "steps", "speed"}

    sensors_path = tmp_path / "sensors.json"
    sensors_path.write_text(json.dumps([
        {"name": "m", "kind": "measurements"},
        {"name": "c", "kind": "contact"},
    ]))
    fps_out = tmp_path / "fps.json"
    rc = main(["fps", "--sensors", str(sensors_path), "--steps", "1000",
               "--out", str(fps_out)])
    assert rc == 0
    assert json.loads(fps_out.read_text())["steps_per_s"] > 0
