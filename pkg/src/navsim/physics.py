"""Cylinder-proxy agent dynamics: acceleration-injection controls, clamped
speeds, friction, and swept-circle collision with slide response.

Two presets: "discrete" maps commands to calibrated displacements (0.2 m
steps, 0.4 rad turns); "continuous" integrates injected accelerations
semi-implicitly.  Both resolve collisions by sliding and never penetrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import Vec2, heading, left_of
from .scene import House, wall_solid_pieces

COMMAND_KINDS = (
    "step_forward", "step_back", "turn_left", "turn_right",
    "strafe_left", "strafe_right", "look_up", "look_down", "idle",
)

DISCRETE_STEP = 0.2      # m per translation command
DISCRETE_TURN = 0.4      # rad per turn command
PITCH_STEP = 0.2         # rad per look command
PITCH_LIMIT = math.pi / 3

CONTACT_HEIGHT = 0.3     # m above ground where contact sensors sit
CONTACT_EPS = 1e-3       # m beyond the radius still counted as touching
_SLIDE_ITERATIONS = 3
_BACKOFF = 1e-9
_COS_45 = math.cos(math.pi / 4)


@dataclass(frozen=True)
class AgentConfig:
    radius: float = 0.10
    height: float = 1.09
    eye_height: float = 1.09
    mass: float = 1.0
    linear_accel: float = 20.0
    angular_accel: float = 4.0 * math.pi
    max_linear_speed: float = 2.0
    max_angular_speed: float = 4.0 * math.pi
    friction: float = 4.0
    preset: str = "discrete"  # "discrete" | "continuous"
    dt: float = 0.1

    def __post_init__(self):
        for name in ("radius", "height", "eye_height", "mass", "linear_accel",
                     "angular_accel", "max_linear_speed", "max_angular_speed", "dt"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"agent config field {name} must be positive")
        if self.friction < 0.0:
            raise ValueError("friction must be non-negative")
        if self.preset not in ("discrete", "continuous"):
            raise ValueError(f"unknown preset {self.preset!r}")


@dataclass(frozen=True)
class AgentState:
    position: Vec2
    yaw: float
    pitch: float = 0.0
    linear_velocity: Vec2 = (0.0, 0.0)
    angular_velocity: float = 0.0

    @property
    def forward(self) -> Vec2:
        return heading(self.yaw)

    @property
    def forward_speed(self) -> float:
        f = self.forward
        return self.linear_velocity[0] * f[0] + self.linear_velocity[1] * f[1]


@dataclass(frozen=True)
class ControlCommand:
    kind: str
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in COMMAND_KINDS:
            raise ValueError(f"unknown command kind {self.kind!r}")
        if self.scale < 0.0:
            raise ValueError("command scale must be >= 0")


@dataclass(frozen=True)
class ContactReading:
    front: bool = False
    right: bool = False
    back: bool = False
    left: bool = False
    directions: tuple[Vec2, ...] = ()  # agent-to-surface unit vectors, world frame

    @property
    def flags(self) -> tuple[int, int, int, int]:
        return (int(self.front), int(self.right), int(self.back), int(self.left))

    @property
    def any(self) -> bool:
        return self.front or self.right or self.back or self.left


@dataclass
class CollisionWorld:
    """SoA view of the solid ground-plane shapes of a house.

    Shapes: grounded wall pieces and all object footprints, then four fence
    rectangles just outside the bounds so the agent cannot wander off-grid
    through exterior door openings.  `real_count` excludes the fence.
    """

    cx: np.ndarray
    cz: np.ndarray
    ux: np.ndarray
    uz: np.ndarray
    hu: np.ndarray
    hv: np.ndarray
    contact_ok: np.ndarray
    real_count: int
    bounds: tuple[float, float, float, float]

    @property
    def arrays(self):
        return (self.cx, self.cz, self.ux, self.uz, self.hu, self.hv)


def collision_shapes(house: House) -> list[tuple[float, float, float, float, float, float, bool]]:
    """Ground-plane shapes as (cx, cz, ux, uz, hu, hv, contact_eligible).

    A wall piece blocks movement when it reaches the ground; headers above
    door openings do not.  Object footprints always block; the contact flag
    applies the sensor-height rule.
    """
    shapes = []
    for piece in wall_solid_pieces(house):
        if piece.y0 > 0.0:
            continue
        r = piece.rect(house)
        eligible = piece.y1 >= CONTACT_HEIGHT
        shapes.append((r.cx, r.cz, r.ux, r.uz, r.hu, r.hv, eligible))
    for ob in house.objects:
        r = ob.footprint
        eligible = ob.base_height <= CONTACT_HEIGHT <= ob.top
        shapes.append((r.cx, r.cz, r.ux, r.uz, r.hu, r.hv, eligible))
    return shapes


def build_collision_world(house: House, agent_radius: float = 0.10,
                          with_fence: bool = True) -> CollisionWorld:
    shapes = collision_shapes(house)
    real_count = len(shapes)
    if with_fence:
        x0, z0, x1, z1 = house.bounds
        r = agent_radius
        span_x = (x1 - x0) / 2.0 + r + 2.0
        span_z = (z1 - z0) / 2.0 + r + 2.0
        mx, mz = (x0 + x1) / 2.0, (z0 + z1) / 2.0
        fence = [
            (x0 - r - 0.5, mz, 1.0, 0.0, 0.5, span_z, True),
            (x1 + r + 0.5, mz, 1.0, 0.0, 0.5, span_z, True),
            (mx, z0 - r - 0.5, 1.0, 0.0, span_x, 0.5, True),
            (mx, z1 + r + 0.5, 1.0, 0.0, span_x, 0.5, True),
        ]
        shapes = shapes + fence
    n = len(shapes)
    arr = np.zeros((7, max(n, 1)), dtype=np.float64)
    for i, s in enumerate(shapes):
        arr[:6, i] = s[:6]
        arr[6, i] = 1.0 if s[6] else 0.0
    if n == 0:
        arr = np.zeros((7, 0), dtype=np.float64)
    return CollisionWorld(
        cx=np.ascontiguousarray(arr[0]),
        cz=np.ascontiguousarray(arr[1]),
        ux=np.ascontiguousarray(arr[2]),
        uz=np.ascontiguousarray(arr[3]),
        hu=np.ascontiguousarray(arr[4]),
        hv=np.ascontiguousarray(arr[5]),
        contact_ok=np.ascontiguousarray(arr[6]).astype(np.uint8),
        real_count=real_count,
        bounds=house.bounds,
    )


def _resolve_move(pos: Vec2, delta: Vec2, radius: float, world: CollisionWorld) -> Vec2:
    x, z = _kernels.move_circle(
        pos[0], pos[1], delta[0], delta[1], radius,
        *world.arrays, _SLIDE_ITERATIONS, _BACKOFF,
    )
    return (x, z)


def contact_reading(state: AgentState, cfg: AgentConfig,
                    world: CollisionWorld) -> ContactReading:
    """Four binary contact sensors (front, right, back, left)."""
    out = np.empty((16, 2), dtype=np.float64)
    count = _kernels.query_contacts(
        state.position[0], state.position[1], cfg.radius + CONTACT_EPS,
        *world.arrays, world.contact_ok, out,
    )
    if count == 0:
        return ContactReading()
    dirs = tuple((float(out[i, 0]), float(out[i, 1])) for i in range(count))
    f = heading(state.yaw)
    l = left_of(state.yaw)
    sensor_dirs = (f, (-l[0], -l[1]), (-f[0], -f[1]), l)  # front, right, back, left
    fired = [False, False, False, False]
    for d in dirs:
        for i, s in enumerate(sensor_dirs):
            if d[0] * s[0] + d[1] * s[1] >= _COS_45 - 1e-9:
                fired[i] = True
    return ContactReading(front=fired[0], right=fired[1], back=fired[2],
                          left=fired[3], directions=dirs)


_TRANSLATIONS = {
    "step_forward": (1.0, 0.0),   # (forward, left) components
    "step_back": (-1.0, 0.0),
    "strafe_left": (0.0, 1.0),
    "strafe_right": (0.0, -1.0),
}


def _world_direction(yaw: float, fwd: float, left: float) -> Vec2:
    f = heading(yaw)
    l = left_of(yaw)
    return (fwd * f[0] + left * l[0], fwd * f[1] + left * l[1])


def step(state: AgentState, cmd: ControlCommand, cfg: AgentConfig,
         world: CollisionWorld) -> tuple[AgentState, ContactReading]:
    """Advance one control step; returns the new state and its contacts."""
    if cfg.preset == "discrete":
        new = _step_discrete(state, cmd, cfg, world)
    else:
        new = _step_continuous(state, cmd, cfg, world)
    return new, contact_reading(new, cfg, world)


def _step_discrete(state: AgentState, cmd: ControlCommand, cfg: AgentConfig,
                   world: CollisionWorld) -> AgentState:
    pos, yaw, pitch = state.position, state.yaw, state.pitch
    if cmd.kind in _TRANSLATIONS:
        fwd, left = _TRANSLATIONS[cmd.kind]
        d = _world_direction(yaw, fwd, left)
        step_len = DISCRETE_STEP * cmd.scale
        pos = _resolve_move(pos, (d[0] * step_len, d[1] * step_len), cfg.radius, world)
    elif cmd.kind == "turn_left":
        yaw = yaw + DISCRETE_TURN * cmd.scale
    elif cmd.kind == "turn_right":
        yaw = yaw - DISCRETE_TURN * cmd.scale
    elif cmd.kind == "look_up":
        pitch = min(pitch + PITCH_STEP * cmd.scale, PITCH_LIMIT)
    elif cmd.kind == "look_down":
        pitch = max(pitch - PITCH_STEP * cmd.scale, -PITCH_LIMIT)
    return AgentState(position=pos, yaw=yaw, pitch=pitch,
                      linear_velocity=(0.0, 0.0), angular_velocity=0.0)


def _step_continuous(state: AgentState, cmd: ControlCommand, cfg: AgentConfig,
                     world: CollisionWorld) -> AgentState:
    dt = cfg.dt
    vx, vz = state.linear_velocity
    omega = state.angular_velocity
    pitch = state.pitch

    lin_injected = cmd.kind in _TRANSLATIONS
    ang_injected = cmd.kind in ("turn_left", "turn_right")

    if lin_injected:
        fwd, left = _TRANSLATIONS[cmd.kind]
        d = _world_direction(state.yaw, fwd, left)
        a = cfg.linear_accel * cmd.scale
        vx += a * d[0] * dt
        vz += a * d[1] * dt
    speed = math.hypot(vx, vz)
    if speed > cfg.max_linear_speed:
        k = cfg.max_linear_speed / speed
        vx *= k
        vz *= k
    if not lin_injected:
        decay = max(0.0, 1.0 - cfg.friction * dt)
        vx *= decay
        vz *= decay

    if ang_injected:
        sign = 1.0 if cmd.kind == "turn_left" else -1.0
        omega += sign * cfg.angular_accel * cmd.scale * dt
    omega = min(max(omega, -cfg.max_angular_speed), cfg.max_angular_speed)
    if not ang_injected:
        omega *= max(0.0, 1.0 - cfg.friction * dt)

    if cmd.kind == "look_up":
        pitch = min(pitch + PITCH_STEP * cmd.scale, PITCH_LIMIT)
    elif cmd.kind == "look_down":
        pitch = max(pitch - PITCH_STEP * cmd.scale, -PITCH_LIMIT)

    yaw = state.yaw + omega * dt
    pos = state.position
    new_pos = _resolve_move(pos, (vx * dt, vz * dt), cfg.radius, world)
    # Velocity reflects the collision-resolved displacement.
    vx = (new_pos[0] - pos[0]) / dt
    vz = (new_pos[1] - pos[1]) / dt
    return AgentState(position=new_pos, yaw=yaw, pitch=pitch,
                      linear_velocity=(vx, vz), angular_velocity=omega)


def agent_config_from_json(doc: dict) -> AgentConfig:
    known = {f for f in AgentConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown agent config fields: {sorted(unknown)}")
    kwargs = {}
    for key, value in doc.items():
        kwargs[key] = str(value) if key == "preset" else float(value)
    return AgentConfig(**kwargs)


def agent_config_to_json(cfg: AgentConfig) -> dict:
    return {
        "radius": cfg.radius, "height": cfg.height, "eye_height": cfg.eye_height,
        "mass": cfg.mass, "linear_accel": cfg.linear_accel,
        "angular_accel": cfg.angular_accel, "max_linear_speed": cfg.max_linear_speed,
        "max_angular_speed": cfg.max_angular_speed, "friction": cfg.friction,
        "preset": cfg.preset, "dt": cfg.dt,
    }
