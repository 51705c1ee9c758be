"""Benchmark harness: scripted baseline policies over procedural scene
suites, plus an in-process simulator throughput probe.

Policies act on the discretized action set (step_forward, turn_left,
turn_right).  Suites are generated from fixed published seeds; the empty and
furnished variants of a size class share scene seeds, so they differ only in
clutter.
"""

from __future__ import annotations

import argparse
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .goals import GoalSpec, PointGoal, goal_from_json
from .nav import NavError, SamplingError
from .physics import ContactReading
from .scene import GenerationError, generate_house
from .sensors import Measurements, Observation, SensorSpec, sensor_spec_from_json
from .task import (
    EpisodeConfig,
    Simulation,
    aggregate,
    episode_record,
    write_records_jsonl,
)

POLICY_ACTIONS = ("step_forward", "turn_left", "turn_right")
POLICY_KINDS = ("random", "greedy", "forward_bump")

# Scripted agents consume only the cheap modalities.
BENCH_SENSORS = (
    SensorSpec(name="contact", kind="contact"),
    SensorSpec(name="measurements", kind="measurements"),
)


class BenchError(Exception):
    pass


def _find(obs: Observation, cls):
    for entry in obs.entries:
        if isinstance(entry, cls):
            return entry
    return None


class RandomPolicy:
    """Uniform over the discretized action set."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(np.random.SeedSequence(seed))

    def act(self, obs: Observation) -> str:
        return POLICY_ACTIONS[int(self._rng.integers(len(POLICY_ACTIONS)))]


class GreedyPolicy:
    """Measurements-driven: turn to face the goal direction, else go forward.

    On frontal contact, turn toward the side with smaller angular error.
    """

    TURN_THRESHOLD = 0.3  # rad

    def __init__(self, seed: int):
        del seed  # deterministic; kept for the common constructor shape

    def act(self, obs: Observation) -> str:
        m = _find(obs, Measurements)
        c = _find(obs, ContactReading)
        if m is None:
            return "step_forward"
        dx, dz = m.direction
        if dx == 0.0 and dz == 0.0:
            return "step_forward"
        err = math.atan2(dx, dz)  # positive: goal is to the left
        if c is not None and c.front:
            return "turn_left" if err >= 0.0 else "turn_right"
        if abs(err) > self.TURN_THRESHOLD:
            return "turn_left" if err > 0.0 else "turn_right"
        return "step_forward"


class ForwardBumpPolicy:
    """Walk forward until frontal contact, then turn a random amount."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(np.random.SeedSequence(seed))
        self._turns_left = 0
        self._turn_action = "turn_left"

    def act(self, obs: Observation) -> str:
        if self._turns_left > 0:
            self._turns_left -= 1
            return self._turn_action
        c = _find(obs, ContactReading)
        if c is not None and c.front:
            self._turn_action = "turn_left" if self._rng.random() < 0.5 else "turn_right"
            self._turns_left = int(self._rng.integers(1, 7))
            return self._turn_action
        return "step_forward"


def make_policy(kind: str, seed: int):
    if kind == "random":
        return RandomPolicy(seed)
    if kind == "greedy":
        return GreedyPolicy(seed)
    if kind == "forward_bump":
        return ForwardBumpPolicy(seed)
    raise BenchError(f"unknown policy {kind!r}")


# ---------------------------------------------------------------------------
# Suites

@dataclass(frozen=True)
class Suite:
    name: str
    n_rooms: int
    furnished: bool
    n_scenes: int = 20
    scene_seed: int = 1000
    goal: GoalSpec = field(default_factory=PointGoal)  # point=None: random per episode
    max_steps: int = 500
    min_path_dist: float = 2.0

    @property
    def clutter(self) -> str:
        return "furnished" if self.furnished else "empty"

    @property
    def size(self) -> str:
        if self.n_rooms <= 1:
            return "small"
        return "medium" if self.n_rooms <= 5 else "large"


SUITES: dict[str, Suite] = {
    "empty-small": Suite(name="empty-small", n_rooms=1, furnished=False, scene_seed=1000),
    "empty-medium": Suite(name="empty-medium", n_rooms=5, furnished=False, scene_seed=2000),
    "furnished-small": Suite(name="furnished-small", n_rooms=1, furnished=True, scene_seed=1000),
    "furnished-medium": Suite(name="furnished-medium", n_rooms=5, furnished=True, scene_seed=2000),
}


def load_suite(name_or_path: str) -> Suite:
    if name_or_path in SUITES:
        return SUITES[name_or_path]
    with open(name_or_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    goal = goal_from_json(doc["goal"]) if "goal" in doc else PointGoal()
    return Suite(
        name=str(doc.get("name", name_or_path)),
        n_rooms=int(doc["n_rooms"]),
        furnished=bool(doc["furnished"]),
        n_scenes=int(doc.get("n_scenes", 20)),
        scene_seed=int(doc.get("scene_seed", 1000)),
        goal=goal,
        max_steps=int(doc.get("max_steps", 500)),
        min_path_dist=float(doc.get("min_path_dist", 2.0)),
    )


@dataclass
class BenchmarkReport:
    rows: list[dict]
    runtime: dict
    failures: list[dict]
    records: list[dict] = field(default_factory=list)  # one per episode

    def to_json(self) -> dict:
        return {"rows": self.rows, "runtime": self.runtime, "failures": self.failures}

    def table(self) -> str:
        header = f"{'suite':<20}{'clutter':<12}{'size':<8}{'policy':<14}{'success %':>10}{'speed %':>10}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row['suite']:<20}{row['clutter']:<12}{row['size']:<8}"
                f"{row['policy']:<14}{row['success']:>10.1f}{row['speed']:>10.1f}"
            )
        if self.runtime.get("steps_per_s") is not None:
            lines.append(
                f"throughput: {self.runtime['steps_per_s']:.0f} steps/s "
                f"({self.runtime['episodes']} episodes, {self.runtime['steps']} steps)"
            )
        return "\n".join(lines)


def _episode_seed(base: int, scene_index: int, episode_index: int) -> int:
    ss = np.random.SeedSequence(base, spawn_key=(scene_index, episode_index))
    return int(ss.generate_state(1)[0])


def run_suite(suite: Suite, policy_kind: str, episodes_per_scene: int = 10,
              seed: int = 0) -> BenchmarkReport:
    """Run one policy over a suite; deterministic in (suite, policy, seed).

    Start configurations are derived from (seed, scene, episode) only, so
    different policies on the same seeds face identical episodes.
    """
    if policy_kind not in POLICY_KINDS:
        raise BenchError(f"unknown policy {policy_kind!r}")
    if episodes_per_scene < 1 or suite.n_scenes < 1:
        raise BenchError("suite must contain at least one episode")

    results = []
    records: list[dict] = []
    failures: list[dict] = []
    steps_total = 0
    t_start = time.perf_counter()
    for si in range(suite.n_scenes):
        house_seed = suite.scene_seed + si
        try:
            house = generate_house(house_seed, suite.n_rooms, suite.furnished)
        except GenerationError as exc:
            failures.append({"scene_seed": house_seed, "error": str(exc)})
            continue
        episode_cfg = EpisodeConfig(goal=suite.goal, max_steps=suite.max_steps)
        sim = Simulation(
            house,
            sensor_specs=BENCH_SENSORS,
            episode=episode_cfg,
            min_path_dist=suite.min_path_dist,
        )
        for ei in range(episodes_per_scene):
            ep_seed = _episode_seed(seed, si, ei)
            try:
                obs = sim.reset(ep_seed)
            except (SamplingError, NavError) as exc:
                failures.append({"scene_seed": house_seed, "episode_seed": ep_seed,
                                 "error": str(exc)})
                continue
            policy = make_policy(policy_kind, ep_seed)
            while not sim.done:
                step = sim.step(policy.act(obs))
                obs = step.observation
                steps_total += 1
            result = sim.result()
            results.append(result)
            records.append(episode_record(house, episode_cfg, ep_seed, result))
    elapsed = time.perf_counter() - t_start
    if not results:
        raise BenchError(f"suite {suite.name!r} produced zero episodes")
    metrics = aggregate(results)
    row = {
        "suite": suite.name,
        "clutter": suite.clutter,
        "size": suite.size,
        "policy": policy_kind,
        "episodes": len(results),
        "success": metrics["success_rate"],
        "speed": metrics["mean_speed"],
    }
    runtime = {
        "steps": steps_total,
        "episodes": len(results),
        "elapsed_s": elapsed,
        "steps_per_s": steps_total / elapsed if elapsed > 0 else 0.0,
    }
    return BenchmarkReport(rows=[row], runtime=runtime, failures=failures,
                           records=records)


# ---------------------------------------------------------------------------
# Throughput

def fps_bench(sensor_specs, n_steps: int, seed: int = 0,
              house=None, agent=None, warmup: int = 200) -> float:
    """Wall-clock steps/s of an in-process random-policy loop (no network)."""
    if n_steps < 1000:
        raise BenchError("fps bench needs at least 1000 steps")
    if house is None:
        house = generate_house(42, 5, furnished=True)
    sim = Simulation(
        house,
        agent=agent,
        sensor_specs=tuple(sensor_specs),
        episode=EpisodeConfig(goal=PointGoal(point=None), max_steps=500),
    )
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    episode_seed = seed

    sim.reset(episode_seed)
    for _ in range(warmup):
        if sim.done:
            episode_seed += 1
            sim.reset(episode_seed)
        sim.step(POLICY_ACTIONS[int(rng.integers(len(POLICY_ACTIONS)))])

    done_steps = 0
    t0 = time.perf_counter()
    while done_steps < n_steps:
        if sim.done:
            episode_seed += 1
            sim.reset(episode_seed)
        sim.step(POLICY_ACTIONS[int(rng.integers(len(POLICY_ACTIONS)))])
        done_steps += 1
    elapsed = time.perf_counter() - t0
    return n_steps / elapsed


# ---------------------------------------------------------------------------
# CLI

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="navsim-bench", description="navsim benchmark harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a policy over a scene suite")
    run_p.add_argument("--suite", required=True,
                       help=f"suite name ({', '.join(SUITES)}) or JSON file path")
    run_p.add_argument("--policy", required=True, choices=POLICY_KINDS)
    run_p.add_argument("--episodes", type=int, default=10,
                       help="episodes per scene (default 10)")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", default=None, help="write the report as JSON")
    run_p.add_argument("--records", default=None,
                       help="write per-episode records as JSON lines")

    fps_p = sub.add_parser("fps", help="measure in-process simulator throughput")
    fps_p.add_argument("--sensors", default=None,
                       help="JSON file with a list of sensor specs")
    fps_p.add_argument("--steps", type=int, default=5000)
    fps_p.add_argument("--seed", type=int, default=0)
    fps_p.add_argument("--out", default=None)

    args = parser.parse_args(argv)

    if args.command == "run":
        suite = load_suite(args.suite)
        report = run_suite(suite, args.policy, episodes_per_scene=args.episodes,
                           seed=args.seed)
        print(report.table())
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(report.to_json(), fh, indent=2)
        if args.records:
            write_records_jsonl(report.records, args.records)
        return 0

    if args.command == "fps":
        if args.sensors:
            with open(args.sensors, "r", encoding="utf-8") as fh:
                specs = tuple(sensor_spec_from_json(d) for d in json.load(fh))
        else:
            from .sensors import DEFAULT_SENSORS

            specs = DEFAULT_SENSORS
        rate = fps_bench(specs, args.steps, seed=args.seed)
        result = {"steps": args.steps, "steps_per_s": rate,
                  "sensors": [s.name for s in specs]}
        print(json.dumps(result))
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(result, fh, indent=2)
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
