"""2.5D house model: on-disk JSON format, validation, procedural generation, variation.

A house is a single-floor scene graph: rooms with flat floor polygons, walls as
thick segments with door/window openings punched through them, and furniture as
oriented boxes. Everything is immutable after construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import (
    OrientedRect,
    Vec2,
    point_in_polygon,
    points_in_polygon,
    polygon_is_simple,
    polygon_signed_area,
    rect_rect_distance,
    rect_segment_distance,
)

CATEGORIES = (
    "wall", "floor", "ceiling", "door", "window", "chair", "table", "sofa",
    "bed", "shelf", "lamp", "toilet", "sink", "tv", "plant", "misc",
)

ROOM_CLASSES = (
    "kitchen", "bedroom", "living room", "toilet", "bathroom",
    "dining room", "office", "hallway", "miscellaneous",
)

# Gray levels indexed by palette id; spread so neighbouring palettes are
# distinguishable in a byte image.
PALETTE_ALBEDOS = tuple(40 + 13 * i for i in range(16))

FLOOR_ALBEDO = 120
CEILING_ALBEDO = 235
WALL_ALBEDO = 200


class SceneError(Exception):
    """Base class for scene loading/validation failures."""


class SceneFormatError(SceneError):
    """Raised when a scene file cannot be parsed against the format."""


class SceneValidationError(SceneError):
    """Raised when a parsed scene violates model invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class GenerationError(SceneError):
    """Raised when procedural generation fails after bounded retries."""


@dataclass(frozen=True)
class Material:
    palette_id: int
    albedo: int


@dataclass(frozen=True)
class SceneObject:
    id: str
    category: str
    center: Vec2
    half_extents: Vec2
    yaw: float
    base_height: float
    height: float
    material: Material

    @property
    def footprint(self) -> OrientedRect:
        return OrientedRect(
            cx=self.center[0], cz=self.center[1],
            ux=math.sin(self.yaw + math.pi / 2), uz=math.cos(self.yaw + math.pi / 2),
            hu=self.half_extents[0], hv=self.half_extents[1],
        )

    @property
    def top(self) -> float:
        return self.base_height + self.height


@dataclass(frozen=True)
class Opening:
    wall_ref: str
    span: tuple[float, float]
    bottom: float
    top: float
    kind: str  # "door" | "window"


@dataclass(frozen=True)
class Room:
    id: str
    category: str
    floor_polygon: tuple[Vec2, ...]
    ceiling_height: float


@dataclass(frozen=True)
class Wall:
    id: str
    p0: Vec2
    p1: Vec2
    thickness: float
    height: float
    material: Material

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def point_at(self, t: float) -> Vec2:
        return (
            self.p0[0] + t * (self.p1[0] - self.p0[0]),
            self.p0[1] + t * (self.p1[1] - self.p0[1]),
        )


@dataclass(frozen=True)
class House:
    id: str
    bounds: tuple[float, float, float, float]  # (x0, z0, x1, z1)
    rooms: tuple[Room, ...]
    walls: tuple[Wall, ...]
    openings: tuple[Opening, ...]
    objects: tuple[SceneObject, ...]

    def wall_by_id(self, wall_id: str) -> Wall | None:
        for w in self.walls:
            if w.id == wall_id:
                return w
        return None

    def door_segments(self) -> list[tuple[Vec2, Vec2]]:
        """Centerline segments of all door openings."""
        segs = []
        for op in self.openings:
            if op.kind != "door":
                continue
            w = self.wall_by_id(op.wall_ref)
            if w is None:
                continue
            segs.append((w.point_at(op.span[0]), w.point_at(op.span[1])))
        return segs


@dataclass(frozen=True)
class VariationSpec:
    retexture_seed: int | None = None
    remove_categories: frozenset[str] = frozenset()


@dataclass(frozen=True)
class WallPiece:
    """Solid sub-box of a wall after openings are subtracted."""

    wall_index: int
    t0: float
    t1: float
    y0: float
    y1: float

    def rect(self, house: House) -> OrientedRect:
        w = house.walls[self.wall_index]
        return OrientedRect.from_segment(
            w.point_at(self.t0), w.point_at(self.t1), w.thickness / 2.0
        )


def wall_solid_pieces(house: House) -> list[WallPiece]:
    """Decompose every wall into solid boxes around its openings.

    Openings on one wall are assumed span-disjoint (validated).  A door
    (bottom 0) leaves side pieces plus a header when it stops short of the
    wall top; a window additionally leaves a sill below it.
    """
    pieces: list[WallPiece] = []
    by_wall: dict[int, list[Opening]] = {}
    ids = {w.id: i for i, w in enumerate(house.walls)}
    for op in house.openings:
        if op.wall_ref in ids:
            by_wall.setdefault(ids[op.wall_ref], []).append(op)
    for wi, wall in enumerate(house.walls):
        ops = sorted(by_wall.get(wi, []), key=lambda o: o.span[0])
        cursor = 0.0
        for op in ops:
            t0, t1 = op.span
            if t0 > cursor:
                pieces.append(WallPiece(wi, cursor, t0, 0.0, wall.height))
            if op.bottom > 0.0:
                pieces.append(WallPiece(wi, t0, t1, 0.0, op.bottom))
            if op.top < wall.height:
                pieces.append(WallPiece(wi, t0, t1, op.top, wall.height))
            cursor = t1
        if cursor < 1.0:
            pieces.append(WallPiece(wi, cursor, 1.0, 0.0, wall.height))
    return pieces


# ---------------------------------------------------------------------------
# Serialization

_TOP_FIELDS = {"id", "bounds", "rooms", "walls", "openings", "objects"}


def _check_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise SceneFormatError(f"{where}: unknown fields {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        raise SceneFormatError(f"{where}: missing fields {sorted(missing)}")


def _vec2(v, where: str) -> Vec2:
    if not (isinstance(v, list) and len(v) == 2):
        raise SceneFormatError(f"{where}: expected [x, z] pair")
    return (float(v[0]), float(v[1]))


def _material(v, where: str) -> Material:
    _check_keys(v, {"palette_id", "albedo"}, {"palette_id", "albedo"}, where)
    return Material(palette_id=int(v["palette_id"]), albedo=int(v["albedo"]))


def loads_house(text: str) -> House:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneFormatError("top level must be an object")
    _check_keys(doc, _TOP_FIELDS, _TOP_FIELDS, "house")
    bounds = doc["bounds"]
    if not (isinstance(bounds, list) and len(bounds) == 4):
        raise SceneFormatError("bounds: expected [x0, z0, x1, z1]")

    rooms = []
    for i, r in enumerate(doc["rooms"]):
        where = f"rooms[{i}]"
        _check_keys(r, {"id", "category", "floor_polygon", "ceiling_height"},
                    {"id", "category", "floor_polygon", "ceiling_height"}, where)
        rooms.append(Room(
            id=str(r["id"]),
            category=str(r["category"]),
            floor_polygon=tuple(_vec2(p, where) for p in r["floor_polygon"]),
            ceiling_height=float(r["ceiling_height"]),
        ))
    walls = []
    for i, w in enumerate(doc["walls"]):
        where = f"walls[{i}]"
        _check_keys(w, {"id", "p0", "p1", "thickness", "height", "material"},
                    {"id", "p0", "p1", "thickness", "height", "material"}, where)
        walls.append(Wall(
            id=str(w["id"]),
            p0=_vec2(w["p0"], where),
            p1=_vec2(w["p1"], where),
            thickness=float(w["thickness"]),
            height=float(w["height"]),
            material=_material(w["material"], where),
        ))
    openings = []
    for i, o in enumerate(doc["openings"]):
        where = f"openings[{i}]"
        _check_keys(o, {"wall_ref", "span", "bottom", "top", "kind"},
                    {"wall_ref", "span", "bottom", "top", "kind"}, where)
        openings.append(Opening(
            wall_ref=str(o["wall_ref"]),
            span=(float(o["span"][0]), float(o["span"][1])),
            bottom=float(o["bottom"]),
            top=float(o["top"]),
            kind=str(o["kind"]),
        ))
    objects = []
    for i, ob in enumerate(doc["objects"]):
        where = f"objects[{i}]"
        _check_keys(ob, {"id", "category", "footprint", "base_height", "height", "material"},
                    {"id", "category", "footprint", "base_height", "height", "material"}, where)
        fp = ob["footprint"]
        _check_keys(fp, {"center", "half_extents", "yaw"},
                    {"center", "half_extents", "yaw"}, where + ".footprint")
        objects.append(SceneObject(
            id=str(ob["id"]),
            category=str(ob["category"]),
            center=_vec2(fp["center"], where),
            half_extents=_vec2(fp["half_extents"], where),
            yaw=float(fp["yaw"]),
            base_height=float(ob["base_height"]),
            height=float(ob["height"]),
            material=_material(ob["material"], where),
        ))

    house = House(
        id=str(doc["id"]),
        bounds=tuple(float(b) for b in bounds),
        rooms=tuple(rooms),
        walls=tuple(walls),
        openings=tuple(openings),
        objects=tuple(objects),
    )
    violations = validate_house(house)
    if violations:
        raise SceneValidationError(violations)
    return house


def load_house(path: str | Path) -> House:
    return loads_house(Path(path).read_text(encoding="utf-8"))


def dumps_house(house: House) -> str:
    doc = {
        "id": house.id,
        "bounds": list(house.bounds),
        "rooms": [
            {
                "id": r.id,
                "category": r.category,
                "floor_polygon": [list(p) for p in r.floor_polygon],
                "ceiling_height": r.ceiling_height,
            }
            for r in house.rooms
        ],
        "walls": [
            {
                "id": w.id,
                "p0": list(w.p0),
                "p1": list(w.p1),
                "thickness": w.thickness,
                "height": w.height,
                "material": {"palette_id": w.material.palette_id, "albedo": w.material.albedo},
            }
            for w in house.walls
        ],
        "openings": [
            {
                "wall_ref": o.wall_ref,
                "span": list(o.span),
                "bottom": o.bottom,
                "top": o.top,
                "kind": o.kind,
            }
            for o in house.openings
        ],
        "objects": [
            {
                "id": ob.id,
                "category": ob.category,
                "footprint": {
                    "center": list(ob.center),
                    "half_extents": list(ob.half_extents),
                    "yaw": ob.yaw,
                },
                "base_height": ob.base_height,
                "height": ob.height,
                "material": {"palette_id": ob.material.palette_id, "albedo": ob.material.albedo},
            }
            for ob in house.objects
        ],
    }
    return json.dumps(doc, indent=2)


def save_house(house: House, path: str | Path) -> None:
    Path(path).write_text(dumps_house(house), encoding="utf-8")


# ---------------------------------------------------------------------------
# Validation

def validate_house(house: House) -> list[str]:
    """Check every model invariant; returns one message per violation."""
    v: list[str] = []
    x0, z0, x1, z1 = house.bounds
    if not (x1 > x0 and z1 > z0):
        v.append("house bounds are degenerate")

    seen_rooms: set[str] = set()
    for r in house.rooms:
        if r.id in seen_rooms:
            v.append(f"room {r.id}: duplicate id")
        seen_rooms.add(r.id)
        if r.category not in ROOM_CLASSES:
            v.append(f"room {r.id}: unknown room class {r.category!r}")
        if len(r.floor_polygon) < 3 or not polygon_is_simple(r.floor_polygon):
            v.append(f"room {r.id}: floor polygon is not simple")
        elif polygon_signed_area(r.floor_polygon) <= 0.0:
            v.append(f"room {r.id}: floor polygon must be CCW with positive area")
        if r.ceiling_height <= 0.0:
            v.append(f"room {r.id}: ceiling height must be positive")

    wall_ids: dict[str, Wall] = {}
    for w in house.walls:
        if w.id in wall_ids:
            v.append(f"wall {w.id}: duplicate id")
        wall_ids[w.id] = w
        if w.p0 == w.p1:
            v.append(f"wall {w.id}: degenerate segment")
        if w.thickness <= 0.0 or w.height <= 0.0:
            v.append(f"wall {w.id}: thickness and height must be positive")
        if not (0 <= w.material.albedo <= 255):
            v.append(f"wall {w.id}: albedo outside [0, 255]")

    spans_per_wall: dict[str, list[tuple[float, float]]] = {}
    for i, op in enumerate(house.openings):
        wall = wall_ids.get(op.wall_ref)
        if wall is None:
            v.append(f"opening {i}: wall_ref {op.wall_ref!r} does not resolve")
            continue
        t0, t1 = op.span
        if not (0.0 <= t0 < t1 <= 1.0):
            v.append(f"opening {i} on wall {wall.id}: span must satisfy 0 <= t0 < t1 <= 1")
        if not (op.bottom < op.top <= wall.height):
            v.append(f"opening {i} on wall {wall.id}: requires bottom < top <= wall height")
        if op.kind == "door" and op.bottom != 0.0:
            v.append(f"opening {i} on wall {wall.id}: doors must start at the floor")
        if op.kind not in ("door", "window"):
            v.append(f"opening {i} on wall {wall.id}: unknown kind {op.kind!r}")
        for s0, s1 in spans_per_wall.get(op.wall_ref, []):
            if t0 < s1 and s0 < t1:
                v.append(f"opening {i} on wall {wall.id}: span overlaps another opening")
        spans_per_wall.setdefault(op.wall_ref, []).append((t0, t1))

    seen_objects: set[str] = set()
    for ob in house.objects:
        if ob.id in seen_objects:
            v.append(f"object {ob.id}: duplicate id")
        seen_objects.add(ob.id)
        if ob.category not in CATEGORIES:
            v.append(f"object {ob.id}: unknown category {ob.category!r}")
        if ob.half_extents[0] <= 0.0 or ob.half_extents[1] <= 0.0:
            v.append(f"object {ob.id}: half-extents must be positive")
        if ob.height <= 0.0:
            v.append(f"object {ob.id}: height must be positive")
        if not (0 <= ob.material.albedo <= 255):
            v.append(f"object {ob.id}: albedo outside [0, 255]")
        for cx, cz in ob.footprint.corners():
            if not (x0 <= cx <= x1 and z0 <= cz <= z1):
                v.append(f"object {ob.id}: footprint outside house bounds")
                break

    if len(house.rooms) > 1:
        unreachable = _unconnected_rooms(house)
        if unreachable:
            v.append(
                "rooms not connected by doors: " + ", ".join(sorted(unreachable))
            )
    return v


def room_door_adjacency(house: House) -> dict[str, set[str]]:
    """Graph of rooms connected by a shared door opening."""
    adj: dict[str, set[str]] = {r.id: set() for r in house.rooms}
    for op in house.openings:
        if op.kind != "door":
            continue
        wall = house.wall_by_id(op.wall_ref)
        if wall is None:
            continue
        mid = wall.point_at((op.span[0] + op.span[1]) / 2.0)
        dx = wall.p1[0] - wall.p0[0]
        dz = wall.p1[1] - wall.p0[1]
        ln = math.hypot(dx, dz)
        if ln == 0:
            continue
        # Normal offset slightly beyond the wall face on each side.
        nx, nz = -dz / ln, dx / ln
        off = wall.thickness / 2.0 + 0.05
        sides = []
        for s in (1.0, -1.0):
            p = (mid[0] + s * off * nx, mid[1] + s * off * nz)
            for r in house.rooms:
                if point_in_polygon(p, r.floor_polygon):
                    sides.append(r.id)
                    break
        if len(sides) == 2 and sides[0] != sides[1]:
            adj[sides[0]].add(sides[1])
            adj[sides[1]].add(sides[0])
    return adj


def _unconnected_rooms(house: House) -> set[str]:
    adj = room_door_adjacency(house)
    if not adj:
        return set()
    start = house.rooms[0].id
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return set(adj) - seen


# ---------------------------------------------------------------------------
# Procedural generation

@dataclass(frozen=True)
class GenParams:
    room_edge: tuple[float, float] = (3.0, 8.0)
    area_per_room: tuple[float, float] = (16.0, 40.0)
    wall_height: float = 2.8
    wall_thickness: float = 0.1
    door_width: float = 0.9
    door_margin: float = 0.2
    extra_door_prob: float = 0.3
    objects_per_room: tuple[int, int] = (4, 12)
    object_clearance: float = 0.35
    door_clearance: float = 0.45
    place_attempts: int = 200
    house_attempts: int = 25
    corridor_check_radius: float = 0.1
    corridor_check_resolution: float = 0.1


# Footprint half-extent ranges and heights per placeable category.
_FURNITURE_SIZES: dict[str, tuple[tuple[float, float], tuple[float, float], tuple[float, float]]] = {
    # category: ((hu_min, hu_max), (hv_min, hv_max), (height_min, height_max))
    "chair": ((0.20, 0.30), (0.20, 0.30), (0.45, 0.95)),
    "table": ((0.40, 0.90), (0.30, 0.60), (0.70, 0.78)),
    "sofa": ((0.80, 1.10), (0.40, 0.50), (0.75, 0.95)),
    "bed": ((0.80, 1.05), (0.60, 0.90), (0.45, 0.60)),
    "shelf": ((0.35, 0.60), (0.15, 0.25), (1.20, 2.00)),
    "lamp": ((0.12, 0.18), (0.12, 0.18), (1.20, 1.70)),
    "toilet": ((0.20, 0.25), (0.28, 0.35), (0.40, 0.45)),
    "sink": ((0.22, 0.30), (0.20, 0.25), (0.80, 0.90)),
    "tv": ((0.40, 0.60), (0.10, 0.15), (0.60, 0.90)),
    "plant": ((0.15, 0.25), (0.15, 0.25), (0.60, 1.60)),
    "misc": ((0.15, 0.45), (0.15, 0.45), (0.30, 1.20)),
}

_ROOM_FURNITURE: dict[str, tuple[str, ...]] = {
    "kitchen": ("table", "chair", "shelf", "sink", "misc", "plant"),
    "bedroom": ("bed", "shelf", "chair", "lamp", "misc"),
    "living room": ("sofa", "table", "tv", "shelf", "lamp", "plant"),
    "toilet": ("toilet", "sink", "misc"),
    "bathroom": ("toilet", "sink", "shelf", "misc"),
    "dining room": ("table", "chair", "shelf", "lamp"),
    "office": ("table", "chair", "shelf", "lamp", "misc"),
    "hallway": ("shelf", "plant", "misc", "lamp"),
    "miscellaneous": ("table", "chair", "shelf", "misc", "plant", "lamp"),
}


@dataclass(frozen=True)
class _Rect:
    x0: float
    z0: float
    x1: float
    z1: float

    @property
    def w(self) -> float:
        return self.x1 - self.x0

    @property
    def h(self) -> float:
        return self.z1 - self.z0


def _split_rects(rect: _Rect, n: int, rng: np.random.Generator,
                 min_edge: float) -> list[_Rect] | None:
    if n == 1:
        return [rect]
    axis_x = rect.w >= rect.h
    length = rect.w if axis_x else rect.h
    cross = rect.h if axis_x else rect.w
    n1 = n // 2
    n2 = n - n1
    # Each side needs enough length for its room count at minimum edge.
    lo = max(min_edge, n1 * min_edge * min_edge / cross)
    hi = length - max(min_edge, n2 * min_edge * min_edge / cross)
    if hi <= lo:
        return None
    frac = n1 / n + rng.normal(0.0, 0.06)
    pos = min(max(length * frac, lo), hi)
    if axis_x:
        cut = rect.x0 + pos
        a, b = _Rect(rect.x0, rect.z0, cut, rect.z1), _Rect(cut, rect.z0, rect.x1, rect.z1)
    else:
        cut = rect.z0 + pos
        a, b = _Rect(rect.x0, rect.z0, rect.x1, cut), _Rect(rect.x0, cut, rect.x1, rect.z1)
    left = _split_rects(a, n1, rng, min_edge)
    right = _split_rects(b, n2, rng, min_edge)
    if left is None or right is None:
        return None
    return left + right


def _shared_interval(a: _Rect, b: _Rect) -> tuple[str, float, float, float] | None:
    """Shared boundary between two cells: (axis, coordinate, lo, hi)."""
    eps = 1e-9
    if abs(a.x1 - b.x0) < eps or abs(b.x1 - a.x0) < eps:
        x = a.x1 if abs(a.x1 - b.x0) < eps else a.x0
        lo, hi = max(a.z0, b.z0), min(a.z1, b.z1)
        if hi - lo > eps:
            return ("x", x, lo, hi)
    if abs(a.z1 - b.z0) < eps or abs(b.z1 - a.z0) < eps:
        z = a.z1 if abs(a.z1 - b.z0) < eps else a.z0
        lo, hi = max(a.x0, b.x0), min(a.x1, b.x1)
        if hi - lo > eps:
            return ("z", z, lo, hi)
    return None


def _wall_between(axis: str, coord: float, lo: float, hi: float) -> tuple[Vec2, Vec2]:
    if axis == "x":
        return ((coord, lo), (coord, hi))
    return ((lo, coord), (hi, coord))


def generate_house(seed: int, n_rooms: int, furnished: bool = False,
                   params: GenParams | None = None) -> House:
    """Procedurally generate a valid, navigable house.

    Deterministic in (seed, n_rooms, furnished, params).  The empty and
    furnished variants of the same seed share an identical layout.
    """
    if n_rooms < 1:
        raise ValueError("n_rooms must be >= 1")
    params = params or GenParams()
    last_error = "unknown"
    for attempt in range(params.house_attempts):
        # Separate layout and furniture streams so the empty and furnished
        # variants of one seed share the same layout.
        layout_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(attempt, 0)))
        furn_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(attempt, 1)))
        house = _generate_once(seed, n_rooms, furnished, params, layout_rng, furn_rng)
        if house is None:
            last_error = "layout rejection"
            continue
        if validate_house(house):
            last_error = "validation failure"
            continue
        if furnished and not _has_free_corridor(house, params):
            last_error = "no free corridor between doors"
            continue
        return house
    raise GenerationError(
        f"generation failed for seed {seed} after {params.house_attempts} attempts: {last_error}"
    )


def _generate_once(seed: int, n_rooms: int, furnished: bool, params: GenParams,
                   rng: np.random.Generator, furn_rng: np.random.Generator) -> House | None:
    lo_edge, hi_edge = params.room_edge
    if n_rooms == 1:
        w = rng.uniform(lo_edge + 0.5, hi_edge)
        h = rng.uniform(lo_edge + 0.5, hi_edge)
        cells = [_Rect(0.0, 0.0, w, h)]
        bounds = (0.0, 0.0, w, h)
    else:
        apr = rng.uniform(*params.area_per_room)
        total = n_rooms * apr
        aspect = rng.uniform(0.65, 1.5)
        w = math.sqrt(total * aspect)
        h = total / w
        root = _Rect(0.0, 0.0, w, h)
        cells = _split_rects(root, n_rooms, rng, lo_edge)
        if cells is None:
            return None
        bounds = (0.0, 0.0, w, h)

    rooms = tuple(
        Room(
            id=f"room{i}",
            category=str(rng.choice(ROOM_CLASSES)),
            floor_polygon=((c.x0, c.z0), (c.x1, c.z0), (c.x1, c.z1), (c.x0, c.z1)),
            ceiling_height=params.wall_height,
        )
        for i, c in enumerate(cells)
    )
    # Note: polygon above is CCW under the (x, z) shoelace convention.

    wall_material = Material(palette_id=0, albedo=WALL_ALBEDO)
    walls: list[Wall] = []
    shared: list[tuple[int, int, int]] = []  # (room a, room b, wall index)

    def add_wall(p0: Vec2, p1: Vec2) -> int:
        walls.append(Wall(
            id=f"w{len(walls)}", p0=p0, p1=p1,
            thickness=params.wall_thickness, height=params.wall_height,
            material=wall_material,
        ))
        return len(walls) - 1

    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            si = _shared_interval(cells[i], cells[j])
            if si is not None:
                wi = add_wall(*_wall_between(*si))
                shared.append((i, j, wi))

    # Exterior walls: the part of each cell edge lying on the bounds boundary.
    x0, z0, x1, z1 = bounds
    eps = 1e-9
    for c in cells:
        if abs(c.x0 - x0) < eps:
            add_wall((x0, c.z0), (x0, c.z1))
        if abs(c.x1 - x1) < eps:
            add_wall((x1, c.z0), (x1, c.z1))
        if abs(c.z0 - z0) < eps:
            add_wall((c.x0, z0), (c.x1, z0))
        if abs(c.z1 - z1) < eps:
            add_wall((c.x0, z1), (c.x1, z1))

    min_wall_len = params.door_width + 2 * params.door_margin
    openings: list[Opening] = []

    def place_door(wall_index: int) -> None:
        wall = walls[wall_index]
        length = wall.length
        tw = params.door_width / length
        tm = params.door_margin / length
        tc = rng.uniform(tm + tw / 2.0, 1.0 - tm - tw / 2.0)
        openings.append(Opening(
            wall_ref=wall.id,
            span=(tc - tw / 2.0, tc + tw / 2.0),
            bottom=0.0,
            top=wall.height,
            kind="door",
        ))

    if n_rooms == 1:
        candidates = [i for i in range(len(walls)) if walls[i].length >= min_wall_len]
        if not candidates:
            return None
        place_door(int(rng.choice(candidates)))
    else:
        doorable = [(a, b, wi) for a, b, wi in shared if walls[wi].length >= min_wall_len]
        # Random spanning tree over rooms using door-capable shared walls.
        order = list(range(len(doorable)))
        rng.shuffle(order)
        parent = list(range(n_rooms))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree_edges = []
        rest = []
        for k in order:
            a, b, wi = doorable[k]
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                tree_edges.append(wi)
            else:
                rest.append(wi)
        if len(tree_edges) != n_rooms - 1:
            return None
        for wi in tree_edges:
            place_door(wi)
        for wi in rest:
            if rng.random() < params.extra_door_prob:
                place_door(wi)

    objects: list[SceneObject] = []
    if furnished:
        objects = _place_furniture(cells, rooms, walls, openings, params, furn_rng, bounds)

    return House(
        id=f"gen-{seed}-{n_rooms}{'f' if furnished else 'e'}",
        bounds=bounds,
        rooms=rooms,
        walls=tuple(walls),
        openings=tuple(openings),
        objects=tuple(objects),
    )


def _place_furniture(cells, rooms, walls, openings, params: GenParams,
                     rng: np.random.Generator, bounds) -> list[SceneObject]:
    door_segs: list[tuple[Vec2, Vec2]] = []
    wall_by_id = {w.id: w for w in walls}
    for op in openings:
        if op.kind == "door":
            w = wall_by_id[op.wall_ref]
            door_segs.append((w.point_at(op.span[0]), w.point_at(op.span[1])))

    # Per-category palette, drawn once per house for semantic consistency.
    palettes: dict[str, int] = {}

    objects: list[SceneObject] = []
    rects: list[OrientedRect] = []
    counter = 0
    wall_inset = params.wall_thickness / 2.0 + 0.06
    for cell, room in zip(cells, rooms):
        n_objects = int(rng.integers(params.objects_per_room[0], params.objects_per_room[1] + 1))
        menu = _ROOM_FURNITURE[room.category]
        for _ in range(n_objects):
            category = str(rng.choice(menu))
            (hu_r, hv_r, h_r) = _FURNITURE_SIZES[category]
            placed = False
            for _ in range(params.place_attempts):
                hu = rng.uniform(*hu_r)
                hv = rng.uniform(*hv_r)
                yaw = rng.uniform(0.0, 2.0 * math.pi)
                radius = math.hypot(hu, hv)
                lo_x = cell.x0 + wall_inset + radius
                hi_x = cell.x1 - wall_inset - radius
                lo_z = cell.z0 + wall_inset + radius
                hi_z = cell.z1 - wall_inset - radius
                if hi_x <= lo_x or hi_z <= lo_z:
                    break
                cx = rng.uniform(lo_x, hi_x)
                cz = rng.uniform(lo_z, hi_z)
                rect = OrientedRect(
                    cx=cx, cz=cz,
                    ux=math.sin(yaw + math.pi / 2), uz=math.cos(yaw + math.pi / 2),
                    hu=hu, hv=hv,
                )
                if any(rect_rect_distance(rect, other) < params.object_clearance
                       for other in rects):
                    continue
                if any(rect_segment_distance(rect, a, b) < params.door_clearance
                       for a, b in door_segs):
                    continue
                if category not in palettes:
                    palettes[category] = int(rng.integers(0, len(PALETTE_ALBEDOS)))
                pid = palettes[category]
                objects.append(SceneObject(
                    id=f"obj{counter}",
                    category=category,
                    center=(cx, cz),
                    half_extents=(hu, hv),
                    yaw=yaw,
                    base_height=0.0,
                    height=rng.uniform(*h_r),
                    material=Material(palette_id=pid, albedo=PALETTE_ALBEDOS[pid]),
                ))
                rects.append(rect)
                counter += 1
                placed = True
                break
            if not placed:
                continue
    return objects


def _has_free_corridor(house: House, params: GenParams) -> bool:
    """All free door cells of the occupancy grid share one connected component."""
    from . import nav  # local import to avoid a module cycle

    grid = nav.build_grid(house, params.corridor_check_radius,
                          params.corridor_check_resolution)
    door_cells: set[tuple[int, int]] = set()
    for a, b in house.door_segments():
        door_cells |= nav.cells_near_segment(grid, a, b, grid.resolution)
    door_cells = {c for c in door_cells if grid.free[c]}
    if not door_cells:
        return False
    field = nav.distance_field(grid, [min(door_cells)])
    if any(not math.isfinite(field.dist[c]) for c in door_cells):
        return False
    # Every room must keep at least one free, door-reachable cell.
    reach_ix, reach_iz = np.nonzero(np.isfinite(field.dist) & grid.free)
    if len(reach_ix) == 0:
        return False
    xs = grid.origin[0] + (reach_ix + 0.5) * grid.resolution
    zs = grid.origin[1] + (reach_iz + 0.5) * grid.resolution
    for room in house.rooms:
        if not points_in_polygon(xs, zs, room.floor_polygon).any():
            return False
    return True


# ---------------------------------------------------------------------------
# Variation

def retexture_palette(category: str, retexture_seed: int) -> int:
    """Palette id for a category under a retexture seed; stable across houses."""
    idx = CATEGORIES.index(category)
    rng = np.random.default_rng(np.random.SeedSequence(retexture_seed, spawn_key=(idx,)))
    return int(rng.integers(0, len(PALETTE_ALBEDOS)))


def apply_variation(house: House, variation: VariationSpec) -> House:
    """Remove object categories and deterministically retexture the rest."""
    unknown = set(variation.remove_categories) - set(CATEGORIES)
    if unknown:
        raise SceneError(f"unknown categories in remove_categories: {sorted(unknown)}")
    objects = tuple(
        ob for ob in house.objects if ob.category not in variation.remove_categories
    )
    if variation.retexture_seed is not None:
        seed = variation.retexture_seed
        retextured = []
        for ob in objects:
            pid = retexture_palette(ob.category, seed)
            retextured.append(replace(ob, material=Material(pid, PALETTE_ALBEDOS[pid])))
        objects = tuple(retextured)
    return replace(house, objects=objects)
