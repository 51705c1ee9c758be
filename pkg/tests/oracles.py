"""Independent reference implementations used to check the simulator.

Everything here is deliberately written from first principles with different
data structures and formulas than the production code: distances via exact
integer comparison of a + d*sqrt(2), point-shape distances via polygon edges,
camera rays rebuilt from the pinhole definition.
"""

from __future__ import annotations

import heapq
import math

import numpy as np


# ---------------------------------------------------------------------------
# Exact comparison of path lengths a + d*sqrt(2) (a, d integers)

def exact_less(a1: int, d1: int, a2: int, d2: int) -> bool:
    """a1 + d1*sqrt(2) < a2 + d2*sqrt(2), exactly."""
    left = a1 - a2            # compare left < -(d1 - d2) * sqrt(2)
    right_coeff = d2 - d1     # i.e. left < right_coeff * sqrt(2)
    if right_coeff == 0:
        return left < 0
    right_sign_positive = right_coeff > 0
    if left < 0 and right_sign_positive:
        return True
    if left >= 0 and not right_sign_positive:
        return False
    if left >= 0 and right_sign_positive:
        return left * left < 2 * right_coeff * right_coeff
    # both negative
    return left * left > 2 * right_coeff * right_coeff


def dijkstra_steps_oracle(free: np.ndarray, goal_cells, resolution: float):
    """Textbook lazy-deletion Dijkstra with exact (axial, diagonal) ordering.

    Returns float distances computed as a*res + d*(res*sqrt(2)), plus the
    step-count arrays.  Semantics mirror the contract: 8-connected, sqrt(2)
    diagonals, no corner cutting, blocked goal cells pinned at zero without
    expansion.
    """
    nx, nz = free.shape
    steps: dict[tuple[int, int], tuple[int, int]] = {}
    heap = []
    for c in sorted({(int(a), int(b)) for a, b in goal_cells}):
        steps[c] = (0, 0)
        if free[c]:
            heapq.heappush(heap, (0.0, 0, 0, c))
    settled = set()
    while heap:
        _, a, d, cell = heapq.heappop(heap)
        if cell in settled or steps.get(cell) != (a, d):
            continue
        settled.add(cell)
        ix, iz = cell
        for dx in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if dx == 0 and dz == 0:
                    continue
                jx, jz = ix + dx, iz + dz
                if not (0 <= jx < nx and 0 <= jz < nz) or not free[jx, jz]:
                    continue
                diagonal = dx != 0 and dz != 0
                if diagonal and not (free[ix + dx, iz] and free[ix, iz + dz]):
                    continue
                cand = (a, d + 1) if diagonal else (a + 1, d)
                old = steps.get((jx, jz))
                if old is None or exact_less(cand[0], cand[1], old[0], old[1]):
                    steps[(jx, jz)] = cand
                    key = cand[0] * resolution + cand[1] * (resolution * math.sqrt(2.0))
                    heapq.heappush(heap, (key, cand[0], cand[1], (jx, jz)))
    dist = np.full((nx, nz), np.inf)
    steps_a = np.full((nx, nz), -1, dtype=np.int64)
    steps_d = np.full((nx, nz), -1, dtype=np.int64)
    diag = resolution * math.sqrt(2.0)
    for (ix, iz), (a, d) in steps.items():
        dist[ix, iz] = a * resolution + d * diag
        steps_a[ix, iz] = a
        steps_d[ix, iz] = d
    return dist, steps_a, steps_d


# ---------------------------------------------------------------------------
# Disc-vs-scene blocking oracle (polygon edge arithmetic, no rect clamping)

def _point_to_convex_polygon(p, corners) -> float:
    """Distance from a point to a convex polygon given corner list (0 inside)."""
    inside = True
    n = len(corners)
    best = math.inf
    for i in range(n):
        ax, az = corners[i]
        bx, bz = corners[(i + 1) % n]
        ex, ez = bx - ax, bz - az
        # Cross product sign tells the side; consistent winding means all
        # same-sign for interior points.
        cross = ex * (p[1] - az) - ez * (p[0] - ax)
        if cross < 0:
            inside = False
        # Distance to this edge segment.
        ll = ex * ex + ez * ez
        t = 0.0 if ll == 0 else max(0.0, min(1.0, ((p[0] - ax) * ex + (p[1] - az) * ez) / ll))
        qx, qz = ax + t * ex, az + t * ez
        best = min(best, math.hypot(p[0] - qx, p[1] - qz))
    return 0.0 if inside else best


def solid_wall_polygons(house) -> list[list[tuple[float, float]]]:
    """Ground-level solid wall pieces as corner polygons (CCW).

    Recomputed from scratch: sort a wall's openings, keep the between/around
    intervals, drop pieces that do not reach the floor.
    """
    polys = []
    for wall in house.walls:
        ops = sorted(
            [o for o in house.openings if o.wall_ref == wall.id],
            key=lambda o: o.span[0],
        )
        intervals = []
        cursor = 0.0
        for op in ops:
            if op.span[0] > cursor:
                intervals.append((cursor, op.span[0]))
            if op.bottom > 0.0:  # sill below a window still blocks
                intervals.append(op.span)
            cursor = op.span[1]
        if cursor < 1.0:
            intervals.append((cursor, 1.0))
        dx = wall.p1[0] - wall.p0[0]
        dz = wall.p1[1] - wall.p0[1]
        length = math.hypot(dx, dz)
        ux, uz = dx / length, dz / length
        nx, nz = -uz, ux
        h = wall.thickness / 2.0
        for t0, t1 in intervals:
            ax = wall.p0[0] + t0 * dx
            az = wall.p0[1] + t0 * dz
            bx = wall.p0[0] + t1 * dx
            bz = wall.p0[1] + t1 * dz
            polys.append([
                (ax - nx * h, az - nz * h),
                (bx - nx * h, bz - nz * h),
                (bx + nx * h, bz + nz * h),
                (ax + nx * h, az + nz * h),
            ])
    return polys


def object_polygons(house) -> list[list[tuple[float, float]]]:
    polys = []
    for ob in house.objects:
        cx, cz = ob.center
        hu, hv = ob.half_extents
        ux = math.sin(ob.yaw + math.pi / 2)
        uz = math.cos(ob.yaw + math.pi / 2)
        vx, vz = -uz, ux
        polys.append([
            (cx - ux * hu - vx * hv, cz - uz * hu - vz * hv),
            (cx + ux * hu - vx * hv, cz + uz * hu - vz * hv),
            (cx + ux * hu + vx * hv, cz + uz * hu + vz * hv),
            (cx - ux * hu + vx * hv, cz - uz * hu + vz * hv),
        ])
    return polys


def disc_blocked_oracle(house, center, radius) -> bool:
    """Disc at `center` touches some solid wall piece or object footprint."""
    for poly in solid_wall_polygons(house) + object_polygons(house):
        if _point_to_convex_polygon(center, poly) <= radius:
            return True
    return False


def min_clearance(house, center) -> float:
    """Distance from a point to the nearest solid shape of the house."""
    best = math.inf
    for poly in solid_wall_polygons(house) + object_polygons(house):
        best = min(best, _point_to_convex_polygon(center, poly))
    return best


def batch_min_clearance(house, positions: np.ndarray) -> np.ndarray:
    """Vectorized clearance for (N, 2) positions; negative when inside a shape."""
    px = positions[:, 0]
    pz = positions[:, 1]
    best = np.full(len(positions), np.inf)
    for poly in solid_wall_polygons(house) + object_polygons(house):
        corners = np.asarray(poly)
        # Normalize winding so the interior is on a consistent side.
        area = 0.0
        for i in range(len(corners)):
            x0, z0 = corners[i]
            x1, z1 = corners[(i + 1) % len(corners)]
            area += x0 * z1 - x1 * z0
        if area < 0:
            corners = corners[::-1]
        inside = np.ones(len(positions), dtype=bool)
        edge_dist = np.full(len(positions), np.inf)
        n = len(corners)
        for i in range(n):
            ax, az = corners[i]
            bx, bz = corners[(i + 1) % n]
            ex, ez = bx - ax, bz - az
            cross = ex * (pz - az) - ez * (px - ax)
            inside &= cross >= 0
            ll = ex * ex + ez * ez
            t = np.clip(((px - ax) * ex + (pz - az) * ez) / ll, 0.0, 1.0)
            qx = ax + t * ex
            qz = az + t * ez
            edge_dist = np.minimum(edge_dist, np.hypot(px - qx, pz - qz))
        d = np.where(inside, -edge_dist, edge_dist)
        best = np.minimum(best, d)
    return best


# ---------------------------------------------------------------------------
# Analytic camera/plane oracle

def pinhole_rays(width: int, height: int, fov: float, yaw: float, pitch: float):
    """Unit ray directions for every pixel, rebuilt from the pinhole model."""
    tan_x = math.tan(fov / 2.0)
    tan_y = tan_x * height / width
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    fwd = np.array([cp * sy, sp, cp * cy])
    right = np.array([-cy, 0.0, sy])
    up = np.array([-sp * sy, cp, -sp * cy])
    px = ((np.arange(width) + 0.5) / width * 2.0 - 1.0) * tan_x
    py = (1.0 - (np.arange(height) + 0.5) / height * 2.0) * tan_y
    gx, gy = np.meshgrid(px, py)
    dirs = (right[None, None, :] * gx[:, :, None]
            + up[None, None, :] * gy[:, :, None]
            + fwd[None, None, :])
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    return dirs


def ray_plane_distances(origin, dirs, plane_point, plane_normal):
    """Per-pixel ray distance to an (infinite) plane; inf when parallel/behind."""
    o = np.asarray(origin, dtype=float)
    n = np.asarray(plane_normal, dtype=float)
    p = np.asarray(plane_point, dtype=float)
    denom = dirs @ n
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ((p - o) @ n) / denom
    t = np.where(np.abs(denom) < 1e-12, np.inf, t)
    return np.where(t < 0, np.inf, t)


def depth_byte(distances, far: float) -> np.ndarray:
    return np.floor(np.clip(distances, 0.0, far) / far * 255.0).astype(np.uint8)


# ---------------------------------------------------------------------------
# Door-graph reachability (fresh BFS, used against generated houses)

def rooms_reachable_by_doors(house) -> bool:
    if len(house.rooms) <= 1:
        return True
    adj = {r.id: set() for r in house.rooms}
    for op in house.openings:
        if op.kind != "door":
            continue
        wall = house.wall_by_id(op.wall_ref)
        mid = wall.point_at((op.span[0] + op.span[1]) / 2.0)
        dx = wall.p1[0] - wall.p0[0]
        dz = wall.p1[1] - wall.p0[1]
        ln = math.hypot(dx, dz)
        nxv, nzv = -dz / ln, dx / ln
        off = wall.thickness / 2.0 + 0.05
        touching = []
        for s in (1.0, -1.0):
            probe = (mid[0] + s * off * nxv, mid[1] + s * off * nzv)
            for room in house.rooms:
                if _point_in_poly_odd(probe, room.floor_polygon):
                    touching.append(room.id)
                    break
        if len(touching) == 2 and touching[0] != touching[1]:
            adj[touching[0]].add(touching[1])
            adj[touching[1]].add(touching[0])
    queue = [house.rooms[0].id]
    seen = set(queue)
    while queue:
        cur = queue.pop()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(house.rooms)


def _point_in_poly_odd(p, poly):
    inside = False
    n = len(poly)
    j = n - 1
    for i in range(n):
        xi, zi = poly[i]
        xj, zj = poly[j]
        if (zi > p[1]) != (zj > p[1]):
            xint = xi + (p[1] - zi) * (xj - xi) / (zj - zi)
            if p[0] < xint:
                inside = not inside
        j = i
    return inside
