"""Goal specifications and resolved goal regions.

A goal spec names a target (point, object category, or room class); resolving
it against a house yields a concrete region supporting distance queries and
occupancy-grid goal cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geometry import (
    OrientedRect,
    Vec2,
    closest_point_in_polygon,
    closest_point_on_segment,
    point_segment_distance,
    polygon_distance,
)
from .scene import CATEGORIES, ROOM_CLASSES

DEFAULT_SUCCESS_RADIUS = 0.5


@dataclass(frozen=True)
class PointGoal:
    point: Vec2 | None = None  # None: sampled uniformly from free space at reset
    success_radius: float = DEFAULT_SUCCESS_RADIUS


@dataclass(frozen=True)
class ObjectGoal:
    category: str
    select: str = "any"  # "any" | "random" | "closest"


@dataclass(frozen=True)
class RoomGoal:
    room_class: str


GoalSpec = PointGoal | ObjectGoal | RoomGoal


def success_threshold(goal: GoalSpec) -> float:
    if isinstance(goal, PointGoal):
        return goal.success_radius
    return DEFAULT_SUCCESS_RADIUS


def goal_one_hot(goal: GoalSpec) -> tuple[int, ...] | None:
    """One-hot encoding of semantic goals for the wire observation."""
    if isinstance(goal, RoomGoal):
        return tuple(int(c == goal.room_class) for c in ROOM_CLASSES)
    if isinstance(goal, ObjectGoal):
        return tuple(int(c == goal.category) for c in CATEGORIES)
    return None


def goal_to_json(goal: GoalSpec) -> dict:
    if isinstance(goal, PointGoal):
        return {
            "type": "point",
            "point": list(goal.point) if goal.point is not None else None,
            "success_radius": goal.success_radius,
        }
    if isinstance(goal, ObjectGoal):
        return {"type": "object", "category": goal.category, "select": goal.select}
    return {"type": "room", "room_class": goal.room_class}


def goal_from_json(doc: dict) -> GoalSpec:
    kind = doc.get("type")
    if kind == "point":
        pt = doc.get("point")
        return PointGoal(
            point=(float(pt[0]), float(pt[1])) if pt is not None else None,
            success_radius=float(doc.get("success_radius", DEFAULT_SUCCESS_RADIUS)),
        )
    if kind == "object":
        select = str(doc.get("select", "any"))
        if select not in ("any", "random", "closest"):
            raise ValueError(f"unknown object goal selector {select!r}")
        return ObjectGoal(category=str(doc["category"]), select=select)
    if kind == "room":
        return RoomGoal(room_class=str(doc["room_class"]))
    raise ValueError(f"unknown goal type {kind!r}")


@dataclass(frozen=True)
class GoalRegion:
    """Union of geometric primitives making up a resolved goal."""

    points: tuple[Vec2, ...] = ()
    segments: tuple[tuple[Vec2, Vec2], ...] = ()
    rects: tuple[OrientedRect, ...] = ()
    polygons: tuple[tuple[Vec2, ...], ...] = field(default=())

    def distance(self, p: Vec2) -> float:
        best = math.inf
        for q in self.points:
            best = min(best, math.hypot(p[0] - q[0], p[1] - q[1]))
        for a, b in self.segments:
            best = min(best, point_segment_distance(p, a, b))
        for r in self.rects:
            best = min(best, r.distance(p))
        for poly in self.polygons:
            best = min(best, polygon_distance(p, poly))
        return best

    def closest_point(self, p: Vec2) -> Vec2:
        return self.closest_and_distance(p)[0]

    def closest_and_distance(self, p: Vec2) -> tuple[Vec2, float]:
        best: Vec2 | None = None
        best_d = math.inf

        def consider(q: Vec2) -> None:
            nonlocal best, best_d
            d = math.hypot(p[0] - q[0], p[1] - q[1])
            if d < best_d:
                best_d = d
                best = q

        for q in self.points:
            consider(q)
        for a, b in self.segments:
            consider(closest_point_on_segment(p, a, b))
        for r in self.rects:
            consider(r.closest_point(p))
        for poly in self.polygons:
            consider(closest_point_in_polygon(p, poly))
        if best is None:
            raise ValueError("empty goal region")
        return best, best_d
