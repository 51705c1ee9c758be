"""Episode lifecycle: reset/step semantics, reward, success and timeout,
metric aggregation, and the Simulation facade tying all subsystems together.

Reward per step is the decrease in Euclidean distance to the goal region
minus a constant time penalty of 1/T, so the distance terms telescope to
d_0 - d_final over any episode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import nav, physics, sensors
from .goals import GoalSpec, PointGoal, goal_one_hot, goal_to_json
from .physics import AgentConfig, ControlCommand, ContactReading
from .scene import House
from .sensors import DEFAULT_SENSORS, Observation, SensorSpec


@dataclass(frozen=True)
class EpisodeConfig:
    goal: GoalSpec = field(default_factory=PointGoal)
    seed: int = 0
    max_steps: int = 500
    trials_per_scene: int = 10
    house_id: str | None = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(eq=False)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    success: bool


@dataclass(frozen=True)
class EpisodeResult:
    success: bool
    steps_taken: int
    speed: float  # fraction of time left at success, 0 for failures


class EpisodeError(Exception):
    pass


class EpisodeDoneError(EpisodeError):
    """step() called on a finished (or never started) episode."""


class Simulation:
    """One agent in one house running episodic goal-directed navigation."""

    def __init__(self, house: House, agent: AgentConfig | None = None,
                 sensor_specs: tuple[SensorSpec, ...] | None = None,
                 episode: EpisodeConfig | None = None,
                 grid: nav.OccupancyGrid | None = None,
                 min_path_dist: float | None = None):
        self.house = house
        self.agent_cfg = agent or AgentConfig()
        self.sensor_specs = tuple(sensor_specs) if sensor_specs else DEFAULT_SENSORS
        names = [s.name for s in self.sensor_specs]
        if len(names) != len(set(names)):
            raise ValueError("sensor names must be unique")
        self.episode_cfg = episode or EpisodeConfig()
        self.collision_world = physics.build_collision_world(
            house, self.agent_cfg.radius
        )
        self.render_world = sensors.build_render_world(house)
        self.grid = grid or nav.build_grid(
            house, self.agent_cfg.radius, min(0.1, self.agent_cfg.radius)
        )
        self.min_path_dist = min_path_dist
        self._goal_one_hot = goal_one_hot(self.episode_cfg.goal)
        self._active = False
        self._done = False
        self._success = False
        self._t = 0
        self._reset_count = 0

    # -- episode lifecycle -------------------------------------------------

    def reset(self, seed: int | None = None) -> Observation:
        if seed is None:
            seed = self.episode_cfg.seed + self._reset_count
        self._reset_count += 1
        self.state, self.resolved = nav.sample_start_goal(
            self.house, self.episode_cfg.goal, seed,
            grid=self.grid, agent_cfg=self.agent_cfg,
            min_path_dist=self.min_path_dist,
        )
        self._episode_seed = seed
        self._t = 0
        self._done = False
        self._success = False
        self._active = True
        self._last_dist = self.resolved.region.distance(self.state.position)
        self._initial_dist = self._last_dist
        self._prev_forward_speed = 0.0
        self._contacts = physics.contact_reading(
            self.state, self.agent_cfg, self.collision_world
        )
        return self.observe()

    def step(self, action: ControlCommand | str) -> StepResult:
        if not self._active:
            raise EpisodeDoneError("reset() must be called before step()")
        if self._done:
            raise EpisodeDoneError("episode is done; call reset()")
        cmd = ControlCommand(kind=action) if isinstance(action, str) else action
        prev_speed = self.state.forward_speed
        self.state, self._contacts = physics.step(
            self.state, cmd, self.agent_cfg, self.collision_world
        )
        self._prev_forward_speed = prev_speed
        self._t += 1
        dist = self.resolved.region.distance(self.state.position)
        reward = (self._last_dist - dist) - 1.0 / self.episode_cfg.max_steps
        self._last_dist = dist
        self._success = dist <= self.resolved.threshold
        self._done = self._success or self._t >= self.episode_cfg.max_steps
        return StepResult(observation=self.observe(), reward=reward,
                          done=self._done, success=self._success)

    def observe(self) -> Observation:
        return sensors.observe(
            self.sensor_specs, self.state, self.agent_cfg, self.render_world,
            self._contacts, self.resolved.region, self.resolved.field,
            self._t, self.episode_cfg.max_steps,
            prev_forward_speed=self._prev_forward_speed,
            goal_one_hot=self._goal_one_hot,
            noise_seed=self._episode_seed,
        )

    def result(self) -> EpisodeResult:
        if not self._done:
            raise EpisodeError("episode still running")
        speed = 1.0 - self._t / self.episode_cfg.max_steps if self._success else 0.0
        return EpisodeResult(success=self._success, steps_taken=self._t, speed=speed)

    @property
    def t(self) -> int:
        return self._t

    @property
    def done(self) -> bool:
        return self._done

    @property
    def success(self) -> bool:
        return self._success

    @property
    def contacts(self) -> ContactReading:
        return self._contacts

    @property
    def episode_seed(self) -> int:
        return self._episode_seed

    @property
    def initial_distance(self) -> float:
        return self._initial_dist

    @property
    def last_distance(self) -> float:
        return self._last_dist


def aggregate(results) -> dict[str, float]:
    """Success rate and mean speed over episodes, both in percent."""
    results = list(results)
    if not results:
        raise ValueError("no episode results to aggregate")
    n = len(results)
    successes = sum(1 for r in results if r.success)
    mean_speed = sum(r.speed for r in results) / n
    return {
        "success_rate": 100.0 * successes / n,
        "mean_speed": 100.0 * mean_speed,
    }


def episode_record(house: House, cfg: EpisodeConfig, seed: int,
                   result: EpisodeResult) -> dict:
    return {
        "scene": house.id,
        "seed": seed,
        "goal": goal_to_json(cfg.goal),
        "success": result.success,
        "steps": result.steps_taken,
        "speed": result.speed,
    }


def write_records_jsonl(records, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
