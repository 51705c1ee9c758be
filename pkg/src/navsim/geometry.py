"""Planar geometry shared by the grid builder, collision world, and renderer.

Coordinate convention: right-handed, x-z ground plane, y up, yaw 0 along +z,
yaw increasing counterclockwise when viewed from +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec2 = tuple[float, float]


def heading(yaw: float) -> Vec2:
    """Unit forward vector in the ground plane for a given yaw."""
    return (math.sin(yaw), math.cos(yaw))


def left_of(yaw: float) -> Vec2:
    """Unit vector pointing to the agent's left."""
    return (math.cos(yaw), -math.sin(yaw))


def to_agent_frame(v: Vec2, yaw: float) -> Vec2:
    """Rotate a world-frame ground vector into the agent frame (x = left, z = forward)."""
    x, z = v
    c, s = math.cos(yaw), math.sin(yaw)
    return (x * c - z * s, x * s + z * c)


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle in the ground plane: center, unit u-axis, and half-extents.

    The local v-axis is the u-axis rotated by +90 degrees, i.e. (-uz, ux).
    """

    cx: float
    cz: float
    ux: float
    uz: float
    hu: float
    hv: float

    @staticmethod
    def from_segment(p0: Vec2, p1: Vec2, half_thickness: float) -> "OrientedRect":
        dx, dz = p1[0] - p0[0], p1[1] - p0[1]
        length = math.hypot(dx, dz)
        if length <= 0.0:
            raise ValueError("degenerate segment")
        return OrientedRect(
            cx=(p0[0] + p1[0]) / 2.0,
            cz=(p0[1] + p1[1]) / 2.0,
            ux=dx / length,
            uz=dz / length,
            hu=length / 2.0,
            hv=half_thickness,
        )

    def to_local(self, p: Vec2) -> Vec2:
        rx, rz = p[0] - self.cx, p[1] - self.cz
        return (rx * self.ux + rz * self.uz, -rx * self.uz + rz * self.ux)

    def to_world(self, q: Vec2) -> Vec2:
        lu, lv = q
        return (
            self.cx + lu * self.ux - lv * self.uz,
            self.cz + lu * self.uz + lv * self.ux,
        )

    def corners(self) -> list[Vec2]:
        return [
            self.to_world((su * self.hu, sv * self.hv))
            for su, sv in ((-1, -1), (1, -1), (1, 1), (-1, 1))
        ]

    def closest_point(self, p: Vec2) -> Vec2:
        lu, lv = self.to_local(p)
        lu = min(max(lu, -self.hu), self.hu)
        lv = min(max(lv, -self.hv), self.hv)
        return self.to_world((lu, lv))

    def distance(self, p: Vec2) -> float:
        """Distance from a point to the rectangle (0 inside)."""
        lu, lv = self.to_local(p)
        du = max(abs(lu) - self.hu, 0.0)
        dv = max(abs(lv) - self.hv, 0.0)
        return math.hypot(du, dv)

    def contains(self, p: Vec2) -> bool:
        lu, lv = self.to_local(p)
        return abs(lu) <= self.hu and abs(lv) <= self.hv


def point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> float:
    ax, az = a
    bx, bz = b
    dx, dz = bx - ax, bz - az
    len2 = dx * dx + dz * dz
    if len2 <= 0.0:
        return math.hypot(p[0] - ax, p[1] - az)
    t = ((p[0] - ax) * dx + (p[1] - az) * dz) / len2
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - (ax + t * dx), p[1] - (az + t * dz))


def closest_point_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2:
    ax, az = a
    bx, bz = b
    dx, dz = bx - ax, bz - az
    len2 = dx * dx + dz * dz
    if len2 <= 0.0:
        return a
    t = ((p[0] - ax) * dx + (p[1] - az) * dz) / len2
    t = min(max(t, 0.0), 1.0)
    return (ax + t * dx, az + t * dz)


def rect_rect_distance(a: OrientedRect, b: OrientedRect) -> float:
    """Distance between two rectangles (0 when they overlap).

    Convex-convex: the closest pair is realized corner-to-rect in one of the
    two directions, unless the rectangles overlap.
    """
    if _rects_overlap(a, b):
        return 0.0
    d = min(b.distance(c) for c in a.corners())
    d = min(d, min(a.distance(c) for c in b.corners()))
    return d


def _rects_overlap(a: OrientedRect, b: OrientedRect) -> bool:
    # Separating-axis test on the four face normals.
    for rect, other in ((a, b), (b, a)):
        axes = ((rect.ux, rect.uz), (-rect.uz, rect.ux))
        half = (rect.hu, rect.hv)
        for axis, h in zip(axes, half):
            cproj = (other.cx - rect.cx) * axis[0] + (other.cz - rect.cz) * axis[1]
            r_other = abs(axis[0] * other.ux + axis[1] * other.uz) * other.hu + abs(
                -axis[0] * other.uz + axis[1] * other.ux
            ) * other.hv
            if abs(cproj) > h + r_other:
                return False
    return True


def rect_segment_distance(r: OrientedRect, a: Vec2, b: Vec2) -> float:
    """Distance between a rectangle and a segment (0 when they intersect)."""
    la = r.to_local(a)
    lb = r.to_local(b)
    # Segment endpoint inside the rect means intersection.
    for lu, lv in (la, lb):
        if abs(lu) <= r.hu and abs(lv) <= r.hv:
            return 0.0
    corners = [(-r.hu, -r.hv), (r.hu, -r.hv), (r.hu, r.hv), (-r.hu, r.hv)]
    best = math.inf
    for i in range(4):
        c0, c1 = corners[i], corners[(i + 1) % 4]
        if _segments_intersect(la, lb, c0, c1):
            return 0.0
        best = min(best, _segment_segment_distance(la, lb, c0, c1))
    return best


def _segment_segment_distance(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> float:
    return min(
        point_segment_distance(a0, b0, b1),
        point_segment_distance(a1, b0, b1),
        point_segment_distance(b0, a0, a1),
        point_segment_distance(b1, a0, a1),
    )


def _orient(a: Vec2, b: Vec2, c: Vec2) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool:
    d1 = _orient(b0, b1, a0)
    d2 = _orient(b0, b1, a1)
    d3 = _orient(a0, a1, b0)
    d4 = _orient(a0, a1, b1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    return False


def segments_properly_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool:
    """True when the open interiors of two segments cross."""
    return _segments_intersect(a0, a1, b0, b1)


def polygon_signed_area(poly: tuple[Vec2, ...]) -> float:
    """Shoelace area on (x, z); positive for counterclockwise winding."""
    total = 0.0
    n = len(poly)
    for i in range(n):
        x0, z0 = poly[i]
        x1, z1 = poly[(i + 1) % n]
        total += x0 * z1 - x1 * z0
    return total / 2.0


def polygon_is_simple(poly: tuple[Vec2, ...]) -> bool:
    """Check that no two non-adjacent edges intersect and no edge degenerates."""
    n = len(poly)
    if n < 3:
        return False
    edges = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for a, b in edges:
        if a == b:
            return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def points_in_polygon(xs, zs, poly: tuple[Vec2, ...]):
    """Vectorized even-odd crossing test over point arrays."""
    import numpy as np

    xs = np.asarray(xs, dtype=float)
    zs = np.asarray(zs, dtype=float)
    inside = np.zeros(xs.shape, dtype=bool)
    n = len(poly)
    j = n - 1
    for i in range(n):
        xi, zi = poly[i]
        xj, zj = poly[j]
        cond = (zi > zs) != (zj > zs)
        if zj != zi:
            xint = xi + (zs - zi) * (xj - xi) / (zj - zi)
            inside ^= cond & (xs < xint)
        j = i
    return inside


def point_in_polygon(p: Vec2, poly: tuple[Vec2, ...]) -> bool:
    """Even-odd crossing test."""
    px, pz = p
    inside = False
    n = len(poly)
    j = n - 1
    for i in range(n):
        xi, zi = poly[i]
        xj, zj = poly[j]
        if (zi > pz) != (zj > pz):
            xint = xi + (pz - zi) * (xj - xi) / (zj - zi)
            if px < xint:
                inside = not inside
        j = i
    return inside


def polygon_distance(p: Vec2, poly: tuple[Vec2, ...]) -> float:
    """Distance from a point to a polygon region (0 inside)."""
    if point_in_polygon(p, poly):
        return 0.0
    n = len(poly)
    return min(point_segment_distance(p, poly[i], poly[(i + 1) % n]) for i in range(n))


def closest_point_in_polygon(p: Vec2, poly: tuple[Vec2, ...]) -> Vec2:
    if point_in_polygon(p, poly):
        return p
    n = len(poly)
    best = None
    best_d = math.inf
    for i in range(n):
        q = closest_point_on_segment(p, poly[i], poly[(i + 1) % n])
        d = math.hypot(p[0] - q[0], p[1] - q[1])
        if d < best_d:
            best_d = d
            best = q
    assert best is not None
    return best
