import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import navsim
from navsim.physics import (
    COMMAND_KINDS,
    AgentConfig,
    AgentState,
    ControlCommand,
    build_collision_world,
    contact_reading,
    step,
)
from navsim.scene import House, Material, Wall

import oracles

WALL_MATERIAL = Material(0, 200)


def open_world():
    """A big empty house: bounds far away, no interior geometry."""
    h = House(id="open", bounds=(-50.0, -50.0, 50.0, 50.0), rooms=(), walls=(),
              openings=(), objects=())
    return h, build_collision_world(h)


def wall_ahead_world():
    """One wall whose inner face is at z = 5.15, agent space below it."""
    h = House(
        id="wall", bounds=(0.0, 0.0, 10.0, 10.0), rooms=(),
        walls=(Wall(id="w", p0=(0.0, 5.2), p1=(10.0, 5.2), thickness=0.1,
                    height=2.8, material=WALL_MATERIAL),),
        openings=(), objects=(),
    )
    return h, build_collision_world(h)


def corner_world():
    """Two walls meeting at a right angle; faces at z = 5.15 and x = 5.15."""
    h = House(
        id="corner", bounds=(0.0, 0.0, 10.0, 10.0), rooms=(),
        walls=(
            Wall(id="wa", p0=(0.0, 5.2), p1=(10.0, 5.2), thickness=0.1,
                 height=2.8, material=WALL_MATERIAL),
            Wall(id="wb", p0=(5.2, 0.0), p1=(5.2, 10.0), thickness=0.1,
                 height=2.8, material=WALL_MATERIAL),
        ),
        openings=(), objects=(),
    )
    return h, build_collision_world(h)


DISCRETE = AgentConfig(preset="discrete")
CONTINUOUS = AgentConfig(preset="continuous")


class TestDiscreteKinematics:
    def test_step_forward_exact_20cm(self):
        _, world = open_world()
        for yaw in (0.0, 0.4, 1.1, 3.9, -2.2):
            s0 = AgentState(position=(0.0, 0.0), yaw=yaw)
            s1, _ = step(s0, ControlCommand("step_forward"), DISCRETE, world)
            moved = math.hypot(s1.position[0], s1.position[1])
            assert abs(moved - 0.2) < 1e-9
            heading = (math.sin(yaw), math.cos(yaw))
            along = s1.position[0] * heading[0] + s1.position[1] * heading[1]
            assert abs(along - 0.2) < 1e-9

    def test_turn_left_exact(self):
        _, world = open_world()
        s0 = AgentState(position=(0.0, 0.0), yaw=1.0)
        s1, _ = step(s0, ControlCommand("turn_left"), DISCRETE, world)
        assert abs(s1.yaw - 1.4) < 1e-9
        s2, _ = step(s0, ControlCommand("turn_right"), DISCRETE, world)
        assert abs(s2.yaw - 0.6) < 1e-9

    def test_sixteen_turns_accumulate(self):
        _, world = open_world()
        s = AgentState(position=(0.0, 0.0), yaw=0.0)
        for _ in range(16):
            s, _ = step(s, ControlCommand("turn_left"), DISCRETE, world)
        assert abs(s.yaw - 6.4) < 1e-9

    def test_n_steps_displace_linearly(self):
        _, world = open_world()
        s = AgentState(position=(0.0, 0.0), yaw=0.7)
        for _ in range(10):
            s, _ = step(s, ControlCommand("step_forward"), DISCRETE, world)
        assert abs(math.hypot(*s.position) - 2.0) < 1e-9

    def test_scale_scales_displacement(self):
        _, world = open_world()
        s0 = AgentState(position=(0.0, 0.0), yaw=0.0)
        s1, _ = step(s0, ControlCommand("step_forward", scale=0.5), DISCRETE, world)
        assert abs(s1.position[1] - 0.1) < 1e-9

    def test_strafe_left_is_perpendicular(self):
        _, world = open_world()
        s0 = AgentState(position=(0.0, 0.0), yaw=0.0)
        s1, _ = step(s0, ControlCommand("strafe_left"), DISCRETE, world)
        assert abs(s1.position[0] - 0.2) < 1e-9  # left of +z heading is +x
        assert abs(s1.position[1]) < 1e-9

    def test_velocities_zeroed(self):
        _, world = open_world()
        s0 = AgentState(position=(0.0, 0.0), yaw=0.0,
                        linear_velocity=(0.5, 0.5), angular_velocity=1.0)
        s1, _ = step(s0, ControlCommand("step_forward"), DISCRETE, world)
        assert s1.linear_velocity == (0.0, 0.0)
        assert s1.angular_velocity == 0.0

    def test_pitch_clamped(self):
        _, world = open_world()
        s = AgentState(position=(0.0, 0.0), yaw=0.0)
        for _ in range(10):
            s, _ = step(s, ControlCommand("look_up"), DISCRETE, world)
        assert s.pitch == pytest.approx(math.pi / 3)
        for _ in range(20):
            s, _ = step(s, ControlCommand("look_down"), DISCRETE, world)
        assert s.pitch == pytest.approx(-math.pi / 3)

    def test_unknown_command_rejected(self):
        with pytest.raises(ValueError):
            ControlCommand("jump")


class TestCollision:
    def test_stops_in_contact_with_wall(self):
        house, world = wall_ahead_world()
        s0 = AgentState(position=(5.0, 5.0), yaw=0.0)  # front surface at 5.1
        s1, contacts = step(s0, ControlCommand("step_forward"), DISCRETE, world)
        # Free travel would end at 5.2; the wall face at 5.15 stops the
        # center at 5.05.
        gap = 5.15 - (s1.position[1] + 0.1)
        assert 0.0 <= gap < 1e-6
        assert contacts.front
        assert not (contacts.left or contacts.right or contacts.back)
        clearance = oracles.min_clearance(house, s1.position)
        assert clearance >= 0.1 - 1e-6

    def test_slides_along_wall(self):
        house, world = wall_ahead_world()
        yaw = math.pi / 4  # diagonal into the wall
        s0 = AgentState(position=(5.0, 5.04), yaw=yaw)
        s1, _ = step(s0, ControlCommand("step_forward"), DISCRETE, world)
        assert s1.position[0] > 5.0 + 0.1  # tangential movement happened
        assert s1.position[1] <= 5.05 + 1e-9  # never into the wall
        assert oracles.min_clearance(house, s1.position) >= 0.1 - 1e-6

    def test_wedged_corner_fires_two_sensors(self):
        _, world = corner_world()
        s = AgentState(position=(5.0495, 5.0495), yaw=0.0)
        reading = contact_reading(s, DISCRETE, world)
        assert reading.front  # wall ahead (+z)
        assert reading.left   # wall at +x, which is the agent's left at yaw 0
        assert not reading.right and not reading.back

    def test_free_space_no_contacts(self):
        _, world = open_world()
        s = AgentState(position=(0.0, 0.0), yaw=0.3)
        reading = contact_reading(s, DISCRETE, world)
        assert reading.flags == (0, 0, 0, 0)

    def test_contact_height_rule(self):
        from navsim.scene import SceneObject

        base = House(
            id="shelfworld", bounds=(0.0, 0.0, 10.0, 10.0), rooms=(), walls=(),
            openings=(),
            objects=(
                SceneObject(id="low", category="misc", center=(5.0, 5.25),
                            half_extents=(1.0, 0.1), yaw=0.0, base_height=0.0,
                            height=0.2, material=WALL_MATERIAL),
            ),
        )
        world = build_collision_world(base)
        s = AgentState(position=(5.0, 5.05), yaw=0.0)
        # The slab tops out at 0.2 m, below the 0.3 m sensor height: the
        # footprint still blocks movement but must not register contact.
        reading = contact_reading(s, DISCRETE, world)
        assert reading.flags == (0, 0, 0, 0)
        s1, _ = step(s, ControlCommand("step_forward"), DISCRETE, world)
        assert s1.position[1] < 5.06  # movement blocked regardless

    def test_mini_penetration_fuzz(self, furnished_house):
        world = build_collision_world(furnished_house)
        grid = navsim.build_grid(furnished_house, 0.1, 0.1)
        free = grid.free_cells()
        start = grid.center_of(*(int(v) for v in free[len(free) // 2]))
        rng = np.random.default_rng(123)
        state = AgentState(position=start, yaw=0.0)
        kinds = [k for k in COMMAND_KINDS if k != "idle"]
        positions = []
        for i in range(600):
            cfg = DISCRETE if i % 2 == 0 else CONTINUOUS
            kind = kinds[int(rng.integers(len(kinds)))]
            scale = float(rng.uniform(0.0, 2.0))
            state, _ = step(state, ControlCommand(kind, scale=scale), cfg, world)
            positions.append(state.position)
        for p in positions[::7]:
            assert oracles.min_clearance(furnished_house, p) >= 0.1 - 1e-6


class TestContinuous:
    def test_idle_decays_speed(self):
        _, world = open_world()
        s = AgentState(position=(0.0, 0.0), yaw=0.0, linear_velocity=(1.0, 0.5))
        speeds = [math.hypot(*s.linear_velocity)]
        for _ in range(5):
            s, _ = step(s, ControlCommand("idle"), CONTINUOUS, world)
            speeds.append(math.hypot(*s.linear_velocity))
        assert all(b < a for a, b in zip(speeds, speeds[1:]))

    def test_kinetic_energy_non_increasing_when_coasting(self):
        _, world = open_world()
        s = AgentState(position=(0.0, 0.0), yaw=0.0,
                       linear_velocity=(1.5, 0.0), angular_velocity=2.0)
        energy = [math.hypot(*s.linear_velocity) ** 2]
        for _ in range(20):
            s, _ = step(s, ControlCommand("idle"), CONTINUOUS, world)
            energy.append(math.hypot(*s.linear_velocity) ** 2)
        assert all(b <= a for a, b in zip(energy, energy[1:]))

    def test_single_forward_step_reaches_max_speed(self):
        _, world = open_world()
        s0 = AgentState(position=(0.0, 0.0), yaw=0.0)
        s1, _ = step(s0, ControlCommand("step_forward"), CONTINUOUS, world)
        # a*dt = 2.0 m/s hits the speed clamp exactly; dt moves 0.2 m.
        assert s1.linear_velocity == pytest.approx((0.0, 2.0))
        assert s1.position[1] == pytest.approx(0.2)

    def test_turn_injects_angular_velocity(self):
        _, world = open_world()
        s0 = AgentState(position=(0.0, 0.0), yaw=0.0)
        s1, _ = step(s0, ControlCommand("turn_left"), CONTINUOUS, world)
        assert s1.angular_velocity == pytest.approx(0.4 * math.pi)
        assert s1.yaw == pytest.approx(0.04 * math.pi)
        s2, _ = step(s0, ControlCommand("turn_right"), CONTINUOUS, world)
        assert s2.angular_velocity == pytest.approx(-0.4 * math.pi)

    def test_determinism_bitwise(self):
        _, world = open_world()
        rng = np.random.default_rng(9)
        kinds = list(COMMAND_KINDS)
        commands = [ControlCommand(kinds[int(rng.integers(len(kinds)))],
                                   scale=float(rng.uniform(0, 1.5)))
                    for _ in range(200)]

        def run():
            s = AgentState(position=(0.3, 0.4), yaw=0.2)
            out = []
            for i, cmd in enumerate(commands):
                cfg = CONTINUOUS if i % 3 else DISCRETE
                s, _ = step(s, cmd, cfg, world)
                out.append(s)
            return out

        a = run()
        b = run()
        assert a == b  # exact float equality, element by element


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_speed_clamps_never_exceeded(data):
    _, world = open_world()
    cfg = CONTINUOUS
    s = AgentState(position=(0.0, 0.0), yaw=0.0)
    n = data.draw(st.integers(min_value=1, max_value=60))
    for _ in range(n):
        kind = data.draw(st.sampled_from(COMMAND_KINDS))
        scale = data.draw(st.floats(min_value=0.0, max_value=3.0,
                                    allow_nan=False))
        s, _ = step(s, ControlCommand(kind, scale=scale), cfg, world)
        assert math.hypot(*s.linear_velocity) <= cfg.max_linear_speed + 1e-9
        assert abs(s.angular_velocity) <= cfg.max_angular_speed + 1e-9


def test_config_validation():
    with pytest.raises(ValueError):
        AgentConfig(radius=0.0)
    with pytest.raises(ValueError):
        AgentConfig(preset="warp")
    with pytest.raises(ValueError):
        AgentConfig(dt=-0.1)
