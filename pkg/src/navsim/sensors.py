"""Observation synthesis: raycast camera channels, contact flags, and scalar
measurements.

All camera modalities (grayscale color, depth, normals, semantic and instance
labels) come from one shared per-pixel raycast against the house geometry;
sensors that share a mount point and optics reuse the same ray pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .geometry import Vec2, heading, left_of, to_agent_frame
from .goals import GoalRegion
from .nav import DistanceField
from .physics import AgentConfig, AgentState, ContactReading
from .scene import (
    CATEGORIES,
    CEILING_ALBEDO,
    FLOOR_ALBEDO,
    House,
    wall_solid_pieces,
)

SENSOR_KINDS = ("color", "depth", "normal", "semantic", "instance",
                "contact", "measurements")
CAMERA_KINDS = ("color", "depth", "normal", "semantic", "instance")

# Channels that carry continuous signal and accept additive noise.
_NOISY_KINDS = ("color", "depth", "normal")


def semantic_id(category: str) -> int:
    """1-based category index; 0 is reserved for no-hit."""
    return CATEGORIES.index(category) + 1


@dataclass(frozen=True)
class SensorSpec:
    name: str
    kind: str
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)  # agent frame, y above eye
    orientation: tuple[float, float] = (0.0, 0.0)  # yaw, pitch offsets
    resolution: tuple[int, int] = (84, 84)  # (width, height)
    fov: float = math.pi / 2  # horizontal
    depth_range: tuple[float, float] = (0.0, 10.0)
    encoding: str = "byte"  # "byte" | "float"
    noise_stddev: float = 0.0

    def __post_init__(self):
        if self.kind not in SENSOR_KINDS:
            raise ValueError(f"unknown sensor kind {self.kind!r}")
        if self.resolution[0] < 1 or self.resolution[1] < 1:
            raise ValueError("sensor resolution must be >= 1")
        if not (0.0 < self.fov < math.pi):
            raise ValueError("fov must lie in (0, pi)")
        if not (self.depth_range[0] < self.depth_range[1]):
            raise ValueError("depth range requires near < far")
        if self.encoding not in ("byte", "float"):
            raise ValueError(f"unknown encoding {self.encoding!r}")


DEFAULT_SENSORS = (
    SensorSpec(name="color", kind="color"),
    SensorSpec(name="depth", kind="depth"),
    SensorSpec(name="contact", kind="contact"),
    SensorSpec(name="measurements", kind="measurements"),
)


@dataclass(eq=False)
class CameraFrame:
    name: str
    kind: str
    width: int
    height: int
    channels: int
    encoding: str
    data: np.ndarray  # (height, width, channels), row 0 at the top

    @property
    def buffer(self) -> bytes:
        return self.data.tobytes()


@dataclass(frozen=True)
class Measurements:
    velocity_forward: float
    velocity_angular: float
    acceleration: float
    dist_euclid: float
    dist_shortest_path: float  # math.inf when unreachable
    direction: Vec2  # unit vector toward goal, agent frame; (0, 0) at goal
    time_norm: float

    def vector(self) -> tuple[float, float, float, float, float, float]:
        """Wire layout: [d_euclid, d_shortest|-1, dir_x, dir_z, v_fwd, t]."""
        d_sp = self.dist_shortest_path
        return (
            self.dist_euclid,
            d_sp if math.isfinite(d_sp) else -1.0,
            self.direction[0],
            self.direction[1],
            self.velocity_forward,
            self.time_norm,
        )


@dataclass(eq=False)
class Observation:
    entries: tuple  # CameraFrame | ContactReading | Measurements, in config order
    goal_one_hot: tuple[int, ...] | None = None


@dataclass(eq=False)
class RenderWorld:
    """SoA geometry for the raycaster, derived from a house."""

    bcx: np.ndarray
    bcz: np.ndarray
    bux: np.ndarray
    buz: np.ndarray
    bhu: np.ndarray
    bhv: np.ndarray
    by0: np.ndarray
    by1: np.ndarray
    balb: np.ndarray
    bsem: np.ndarray
    binst: np.ndarray
    bcenter: np.ndarray  # (n, 3) box centers for distance sorting
    bradius: np.ndarray
    pvx: np.ndarray
    pvz: np.ndarray
    poff: np.ndarray
    pcnt: np.ndarray
    py: np.ndarray
    pny: np.ndarray
    palb: np.ndarray
    psem: np.ndarray
    pinst: np.ndarray
    pbb: np.ndarray  # per-polygon (xmin, xmax, zmin, zmax)
    _scratch: dict = field(default_factory=dict, repr=False)

    def scratch(self, n: int):
        """Reusable per-world raycast output buffers (one simulator, one user)."""
        buf = self._scratch.get(n)
        if buf is None:
            buf = (
                np.empty(n, dtype=np.float64),
                np.empty((n, 3), dtype=np.float64),
                np.empty(n, dtype=np.int32),
                np.empty(n, dtype=np.int32),
                np.empty(n, dtype=np.float64),
                np.empty((n, 3), dtype=np.float64),
            )
            self._scratch[n] = buf
        return buf


def build_render_world(house: House) -> RenderWorld:
    """Instance ids: room floors, room ceilings, walls, then objects (1-based)."""
    boxes = []
    n_rooms = len(house.rooms)
    wall_instance = {i: 2 * n_rooms + 1 + i for i in range(len(house.walls))}
    for piece in wall_solid_pieces(house):
        wall = house.walls[piece.wall_index]
        r = piece.rect(house)
        boxes.append((r.cx, r.cz, r.ux, r.uz, r.hu, r.hv, piece.y0, piece.y1,
                      float(wall.material.albedo), semantic_id("wall"),
                      wall_instance[piece.wall_index]))
    first_object = 2 * n_rooms + len(house.walls) + 1
    for k, ob in enumerate(house.objects):
        r = ob.footprint
        boxes.append((r.cx, r.cz, r.ux, r.uz, r.hu, r.hv, ob.base_height, ob.top,
                      float(ob.material.albedo), semantic_id(ob.category),
                      first_object + k))

    nb = len(boxes)
    b = np.zeros((11, nb), dtype=np.float64)
    for i, box in enumerate(boxes):
        b[:, i] = box
    centers = np.stack(
        [b[0], (b[6] + b[7]) / 2.0, b[1]], axis=1
    ) if nb else np.zeros((0, 3))
    radii = np.sqrt(b[4] ** 2 + b[5] ** 2 + ((b[7] - b[6]) / 2.0) ** 2) if nb else np.zeros(0)

    pvx: list[float] = []
    pvz: list[float] = []
    poff: list[int] = []
    pcnt: list[int] = []
    py: list[float] = []
    pny: list[float] = []
    palb: list[float] = []
    psem: list[int] = []
    pinst: list[int] = []

    def add_poly(poly, y, ny, albedo, sem, inst):
        poff.append(len(pvx))
        pcnt.append(len(poly))
        for vx, vz in poly:
            pvx.append(vx)
            pvz.append(vz)
        py.append(y)
        pny.append(ny)
        palb.append(float(albedo))
        psem.append(sem)
        pinst.append(inst)

    for i, room in enumerate(house.rooms):
        add_poly(room.floor_polygon, 0.0, 1.0, FLOOR_ALBEDO,
                 semantic_id("floor"), i + 1)
        add_poly(room.floor_polygon, room.ceiling_height, -1.0, CEILING_ALBEDO,
                 semantic_id("ceiling"), n_rooms + i + 1)

    bboxes = np.zeros((len(py), 4), dtype=np.float64)
    for k in range(len(py)):
        xs = pvx[poff[k]:poff[k] + pcnt[k]]
        zs = pvz[poff[k]:poff[k] + pcnt[k]]
        bboxes[k] = (min(xs), max(xs), min(zs), max(zs))

    return RenderWorld(
        bcx=np.ascontiguousarray(b[0]), bcz=np.ascontiguousarray(b[1]),
        bux=np.ascontiguousarray(b[2]), buz=np.ascontiguousarray(b[3]),
        bhu=np.ascontiguousarray(b[4]), bhv=np.ascontiguousarray(b[5]),
        by0=np.ascontiguousarray(b[6]), by1=np.ascontiguousarray(b[7]),
        balb=np.ascontiguousarray(b[8]),
        bsem=np.ascontiguousarray(b[9].astype(np.int32)),
        binst=np.ascontiguousarray(b[10].astype(np.int32)),
        bcenter=np.ascontiguousarray(centers),
        bradius=np.ascontiguousarray(radii),
        pvx=np.asarray(pvx, dtype=np.float64),
        pvz=np.asarray(pvz, dtype=np.float64),
        poff=np.asarray(poff, dtype=np.int32),
        pcnt=np.asarray(pcnt, dtype=np.int32),
        py=np.asarray(py, dtype=np.float64),
        pny=np.asarray(pny, dtype=np.float64),
        palb=np.asarray(palb, dtype=np.float64),
        psem=np.asarray(psem, dtype=np.int32),
        pinst=np.asarray(pinst, dtype=np.int32),
        pbb=np.ascontiguousarray(bboxes),
    )


@dataclass(frozen=True)
class CameraPose:
    position: tuple[float, float, float]
    yaw: float
    pitch: float


def camera_pose(state: AgentState, cfg: AgentConfig, spec: SensorSpec) -> CameraPose:
    """Eye position plus the sensor's agent-frame offset and orientation."""
    f = heading(state.yaw)
    l = left_of(state.yaw)
    ox, oy, oz = spec.offset
    wx = state.position[0] + ox * l[0] + oz * f[0]
    wz = state.position[1] + ox * l[1] + oz * f[1]
    return CameraPose(
        position=(wx, cfg.eye_height + oy, wz),
        yaw=state.yaw + spec.orientation[0],
        pitch=state.pitch + spec.orientation[1],
    )


_LOCAL_DIR_CACHE: dict[tuple[int, int, float], np.ndarray] = {}


def _local_dirs(width: int, height: int, fov: float) -> np.ndarray:
    key = (width, height, fov)
    cached = _LOCAL_DIR_CACHE.get(key)
    if cached is not None:
        return cached
    tan_x = math.tan(fov / 2.0)
    tan_y = tan_x * height / width
    xs = (np.arange(width) + 0.5) / width * 2.0 - 1.0
    ys = 1.0 - (np.arange(height) + 0.5) / height * 2.0
    px, pyy = np.meshgrid(xs * tan_x, ys * tan_y)
    d = np.stack([px.ravel(), pyy.ravel(), np.ones(width * height)], axis=1)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    d = np.ascontiguousarray(d)
    _LOCAL_DIR_CACHE[key] = d
    return d


def _camera_basis(yaw: float, pitch: float):
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    fwd = np.array([cp * sy, sp, cp * cy])
    right = np.array([-cy, 0.0, sy])
    up = np.array([-sp * sy, cp, -sp * cy])
    return right, up, fwd


def _raycast_pass(world: RenderWorld, pose: CameraPose, width: int, height: int,
                  fov: float, near: float, far: float):
    local = _local_dirs(width, height, fov)
    n = width * height
    out_t, out_n, out_sem, out_inst, out_alb, dirs = world.scratch(n)
    right, up, fwd = _camera_basis(pose.yaw, pose.pitch)
    rot = np.stack([right, up, fwd])  # rows: camera axes in world frame
    np.matmul(local, rot, out=dirs)
    origin = pose.position
    if len(world.bcx):
        min_dist = np.linalg.norm(world.bcenter - np.asarray(origin), axis=1)
        min_dist -= world.bradius
        np.maximum(min_dist, 0.0, out=min_dist)
        order = np.argsort(min_dist).astype(np.int64)
    else:
        min_dist = np.zeros(0)
        order = np.zeros(0, dtype=np.int64)
    _kernels.raycast(
        origin[0], origin[1], origin[2], dirs, order, min_dist,
        world.bcx, world.bcz, world.bux, world.buz, world.bhu, world.bhv,
        world.by0, world.by1, world.balb, world.bsem, world.binst,
        world.pvx, world.pvz, world.poff, world.pcnt, world.py, world.pny,
        world.palb, world.psem, world.pinst, world.pbb,
        near, far, out_t, out_n, out_sem, out_inst, out_alb,
    )
    return out_t, out_n, out_sem, out_inst, out_alb, dirs


def _extract_frame(spec: SensorSpec, t, normals, sem, inst, alb, dirs,
                   rng: np.random.Generator | None) -> CameraFrame:
    width, height = spec.resolution
    near, far = spec.depth_range
    hit = t < far
    byte = spec.encoding == "byte"
    kind = spec.kind

    if kind == "depth":
        if byte:
            q = np.floor(np.clip(t, 0.0, far) / far * 255.0)
            data = np.where(hit, q, 255.0)
        else:
            data = np.where(hit, t, far)
        channels = 1
    elif kind == "color":
        cos = np.clip(-(normals * dirs).sum(axis=1), 0.0, 1.0)
        shade = alb * cos
        data = np.where(hit, shade, 0.0)
        channels = 1
    elif kind == "normal":
        if byte:
            data = np.where(hit[:, None], np.rint((normals + 1.0) / 2.0 * 255.0), 0.0)
        else:
            data = np.where(hit[:, None], normals, 0.0)
        channels = 3
    elif kind == "semantic":
        data = np.where(hit, sem, 0)
        channels = 1
    elif kind == "instance":
        data = np.where(hit, inst, 0)
        channels = 1
    else:
        raise ValueError(f"not a camera kind: {kind!r}")

    data = data.reshape(height, width, channels).astype(np.float64)
    if spec.noise_stddev > 0.0 and rng is not None and kind in _NOISY_KINDS:
        data = data + rng.normal(0.0, spec.noise_stddev, size=data.shape)
        if kind == "depth" and not byte:
            data = np.clip(data, 0.0, far)
        elif kind == "normal" and not byte:
            data = np.clip(data, -1.0, 1.0)
        elif byte or kind == "color":
            data = np.clip(data, 0.0, 255.0)

    if byte:
        out = np.clip(np.rint(data), 0.0, 255.0).astype(np.uint8)
    else:
        out = data.astype(np.float32)
    return CameraFrame(name=spec.name, kind=kind, width=width, height=height,
                       channels=channels, encoding=spec.encoding, data=out)


def render(world: RenderWorld, pose: CameraPose, spec: SensorSpec,
           rng: np.random.Generator | None = None) -> CameraFrame:
    """Render one camera frame; pure given (world, pose, spec, rng state)."""
    if spec.kind not in CAMERA_KINDS:
        raise ValueError(f"render requires a camera kind, got {spec.kind!r}")
    width, height = spec.resolution
    near, far = spec.depth_range
    t, normals, sem, inst, alb, dirs = _raycast_pass(
        world, pose, width, height, spec.fov, near, far
    )
    return _extract_frame(spec, t, normals, sem, inst, alb, dirs, rng)


def measurements(state: AgentState, cfg: AgentConfig, region: GoalRegion,
                 dist_field: DistanceField, t: int, max_steps: int,
                 prev_forward_speed: float = 0.0) -> Measurements:
    p = state.position
    cp, d_e = region.closest_and_distance(p)
    if d_e > 0.0:
        world_dir = ((cp[0] - p[0]) / d_e, (cp[1] - p[1]) / d_e)
        direction = to_agent_frame(world_dir, state.yaw)
    else:
        d_e = 0.0
        direction = (0.0, 0.0)
    vf = state.forward_speed
    return Measurements(
        velocity_forward=vf,
        velocity_angular=state.angular_velocity,
        acceleration=(vf - prev_forward_speed) / cfg.dt,
        dist_euclid=d_e,
        dist_shortest_path=dist_field.sample(p),
        direction=direction,
        time_norm=t / max_steps,
    )


def observe(specs, state: AgentState, cfg: AgentConfig, render_world: RenderWorld,
            contacts: ContactReading, region: GoalRegion, dist_field: DistanceField,
            t: int, max_steps: int, prev_forward_speed: float = 0.0,
            goal_one_hot: tuple[int, ...] | None = None,
            noise_seed: int | None = None) -> Observation:
    """One entry per sensor spec, in configuration order.

    Camera sensors sharing mount, optics, and range reuse a single ray pass.
    """
    if not specs:
        raise ValueError("sensor configuration is empty")
    passes: dict[tuple, tuple] = {}
    entries: list = []
    for index, spec in enumerate(specs):
        if spec.kind in CAMERA_KINDS:
            key = (spec.offset, spec.orientation, spec.resolution, spec.fov,
                   spec.depth_range)
            if key not in passes:
                pose = camera_pose(state, cfg, spec)
                passes[key] = _raycast_pass(
                    render_world, pose, spec.resolution[0], spec.resolution[1],
                    spec.fov, spec.depth_range[0], spec.depth_range[1],
                )
            rng = None
            if spec.noise_stddev > 0.0:
                seed = noise_seed if noise_seed is not None else 0
                rng = np.random.default_rng(
                    np.random.SeedSequence(seed, spawn_key=(t, index))
                )
            entries.append(_extract_frame(spec, *passes[key], rng))
        elif spec.kind == "contact":
            entries.append(contacts)
        elif spec.kind == "measurements":
            entries.append(measurements(state, cfg, region, dist_field, t,
                                        max_steps, prev_forward_speed))
        else:
            raise ValueError(f"unknown sensor kind {spec.kind!r}")
    return Observation(entries=tuple(entries), goal_one_hot=goal_one_hot)


def sensor_spec_from_json(doc: dict) -> SensorSpec:
    known = {"name", "kind", "offset", "orientation", "resolution", "fov",
             "depth_range", "encoding", "noise_stddev"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown sensor fields: {sorted(unknown)}")
    kwargs: dict = {"name": str(doc["name"]), "kind": str(doc["kind"])}
    if "offset" in doc:
        kwargs["offset"] = tuple(float(v) for v in doc["offset"])
    if "orientation" in doc:
        kwargs["orientation"] = tuple(float(v) for v in doc["orientation"])
    if "resolution" in doc:
        kwargs["resolution"] = tuple(int(v) for v in doc["resolution"])
    if "fov" in doc:
        kwargs["fov"] = float(doc["fov"])
    if "depth_range" in doc:
        kwargs["depth_range"] = tuple(float(v) for v in doc["depth_range"])
    if "encoding" in doc:
        kwargs["encoding"] = str(doc["encoding"])
    if "noise_stddev" in doc:
        kwargs["noise_stddev"] = float(doc["noise_stddev"])
    return SensorSpec(**kwargs)


def sensor_spec_to_json(spec: SensorSpec) -> dict:
    return {
        "name": spec.name, "kind": spec.kind, "offset": list(spec.offset),
        "orientation": list(spec.orientation), "resolution": list(spec.resolution),
        "fov": spec.fov, "depth_range": list(spec.depth_range),
        "encoding": spec.encoding, "noise_stddev": spec.noise_stddev,
    }
