"""Occupancy-grid construction, tile-based shortest paths, navigability
checks, and start/goal sampling.

Grid cells are square; a cell is blocked iff the agent disc centered on it
touches any wall piece (door openings subtracted) or object footprint.
Distances are 8-connected with sqrt(2) diagonals and no corner cutting.
Path lengths are tracked as integer (axial, diagonal) step counts so the
final float distances are exactly reproducible by any independent
implementation using the same cost model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, physics
from .geometry import OrientedRect, Vec2, point_segment_distance
from .goals import (
    GoalRegion,
    GoalSpec,
    ObjectGoal,
    PointGoal,
    RoomGoal,
    success_threshold,
)
from .scene import House

Cell = tuple[int, int]

_SQRT2 = math.sqrt(2.0)


class NavError(Exception):
    pass


class UnsatisfiableGoalError(NavError):
    """The goal cannot be resolved in this house (e.g. missing room class)."""


class SamplingError(NavError):
    """No navigable start/goal pair found within the retry budget."""


@dataclass(eq=False)
class OccupancyGrid:
    resolution: float
    origin: Vec2
    width: int
    height: int
    free: np.ndarray  # bool, shape (width, height), indexed [ix, iz]

    def center_of(self, ix: int, iz: int) -> Vec2:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iz + 0.5) * self.resolution,
        )

    def cell_of(self, p: Vec2) -> Cell | None:
        ix = int(math.floor((p[0] - self.origin[0]) / self.resolution))
        iz = int(math.floor((p[1] - self.origin[1]) / self.resolution))
        if p[0] == self.origin[0] + self.width * self.resolution:
            ix = self.width - 1
        if p[1] == self.origin[1] + self.height * self.resolution:
            iz = self.height - 1
        if 0 <= ix < self.width and 0 <= iz < self.height:
            return (ix, iz)
        return None

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def free_cells(self) -> np.ndarray:
        return np.argwhere(self.free)


@dataclass(eq=False)
class DistanceField:
    grid: OccupancyGrid
    dist: np.ndarray  # float64 (width, height); inf where unreachable
    goal_cells: frozenset[Cell]

    def sample(self, p: Vec2) -> float:
        """Bilinear sample at a world position.

        The containing cell decides reachability; infinite neighbours are
        dropped from the interpolation with weight renormalization.
        """
        g = self.grid
        cell = g.cell_of(p)
        if cell is None or not math.isfinite(self.dist[cell]):
            return math.inf
        gx = (p[0] - g.origin[0]) / g.resolution - 0.5
        gz = (p[1] - g.origin[1]) / g.resolution - 0.5
        gx = min(max(gx, 0.0), g.width - 1.0)
        gz = min(max(gz, 0.0), g.height - 1.0)
        ix0 = min(int(gx), g.width - 1)
        iz0 = min(int(gz), g.height - 1)
        ix1 = min(ix0 + 1, g.width - 1)
        iz1 = min(iz0 + 1, g.height - 1)
        fx = gx - ix0
        fz = gz - iz0
        total = 0.0
        weight = 0.0
        for (ix, iz, w) in (
            (ix0, iz0, (1 - fx) * (1 - fz)),
            (ix1, iz0, fx * (1 - fz)),
            (ix0, iz1, (1 - fx) * fz),
            (ix1, iz1, fx * fz),
        ):
            d = self.dist[ix, iz]
            if math.isfinite(d) and w > 0.0:
                total += w * d
                weight += w
        if weight <= 0.0:
            return float(self.dist[cell])
        return total / weight


def build_grid(house: House, agent_radius: float, resolution: float) -> OccupancyGrid:
    """Rasterize the navigable free space of a house.

    `resolution` must lie in (0, agent_radius] so one cell of inflation
    covers the disc.
    """
    if not (0.0 < resolution <= agent_radius):
        raise ValueError("resolution must be in (0, agent_radius]")
    x0, z0, x1, z1 = house.bounds
    if not (x1 > x0 and z1 > z0):
        raise NavError("degenerate house bounds")
    nx = max(1, int(math.ceil((x1 - x0) / resolution - 1e-9)))
    nz = max(1, int(math.ceil((z1 - z0) / resolution - 1e-9)))
    shapes = physics.collision_shapes(house)
    if shapes:
        arr = np.array([s[:6] for s in shapes], dtype=np.float64).T
        blocked = _kernels.grid_blocked(
            x0, z0, resolution, nx, nz, agent_radius,
            np.ascontiguousarray(arr[0]), np.ascontiguousarray(arr[1]),
            np.ascontiguousarray(arr[2]), np.ascontiguousarray(arr[3]),
            np.ascontiguousarray(arr[4]), np.ascontiguousarray(arr[5]),
        )
        free = blocked == 0
    else:
        free = np.ones((nx, nz), dtype=bool)
    return OccupancyGrid(resolution=resolution, origin=(x0, z0),
                         width=nx, height=nz, free=free)


def distance_field(grid: OccupancyGrid, goal_cells) -> DistanceField:
    """Multi-source Dijkstra over free cells.

    Axial steps cost one resolution, diagonal steps resolution*sqrt(2);
    diagonal moves require both flanking axial cells to be free.  Blocked
    goal cells get distance 0 but are neither expanded nor traversed.
    """
    goals = {(int(ix), int(iz)) for ix, iz in goal_cells}
    if not goals:
        raise ValueError("goal_cells must be non-empty")
    for c in goals:
        if not grid.in_bounds(c):
            raise ValueError(f"goal cell {c} out of bounds")

    res = grid.resolution
    diag = res * _SQRT2
    ordered = sorted(goals)
    goal_ix = np.asarray([c[0] for c in ordered], dtype=np.int32)
    goal_iz = np.asarray([c[1] for c in ordered], dtype=np.int32)
    steps_a, steps_d = _kernels.dijkstra_steps(
        np.ascontiguousarray(grid.free.astype(np.uint8)), goal_ix, goal_iz, res, diag
    )
    dist = np.where(steps_a >= 0,
                    steps_a.astype(np.float64) * res + steps_d.astype(np.float64) * diag,
                    np.inf)
    # A goal cell that is blocked keeps distance 0 only for itself.
    return DistanceField(grid=grid, dist=dist, goal_cells=frozenset(goals))


def is_navigable(grid: OccupancyGrid, start_cell: Cell, goal_cells) -> bool:
    if not grid.in_bounds(start_cell):
        raise ValueError(f"start cell {start_cell} out of bounds")
    field = distance_field(grid, goal_cells)
    return bool(math.isfinite(field.dist[start_cell]))


# ---------------------------------------------------------------------------
# Region-to-cell rasterization

def cells_near_point(grid: OccupancyGrid, p: Vec2, pad: float) -> set[Cell]:
    return _cells_in_bbox(grid, p[0] - pad, p[1] - pad, p[0] + pad, p[1] + pad,
                          lambda cx, cz: math.hypot(cx - p[0], cz - p[1]) <= pad)


def cells_near_segment(grid: OccupancyGrid, a: Vec2, b: Vec2, pad: float) -> set[Cell]:
    return _cells_in_bbox(
        grid,
        min(a[0], b[0]) - pad, min(a[1], b[1]) - pad,
        max(a[0], b[0]) + pad, max(a[1], b[1]) + pad,
        lambda cx, cz: point_segment_distance((cx, cz), a, b) <= pad,
    )


def cells_near_rect(grid: OccupancyGrid, rect: OrientedRect, pad: float) -> set[Cell]:
    r = math.hypot(rect.hu, rect.hv) + pad
    return _cells_in_bbox(
        grid,
        rect.cx - r, rect.cz - r, rect.cx + r, rect.cz + r,
        lambda cx, cz: rect.distance((cx, cz)) <= pad,
    )


def cells_in_polygon(grid: OccupancyGrid, poly: tuple[Vec2, ...]) -> set[Cell]:
    from .geometry import points_in_polygon

    xs = [p[0] for p in poly]
    zs = [p[1] for p in poly]
    res = grid.resolution
    ix0 = max(0, int(math.floor((min(xs) - grid.origin[0]) / res)))
    iz0 = max(0, int(math.floor((min(zs) - grid.origin[1]) / res)))
    ix1 = min(grid.width - 1, int(math.ceil((max(xs) - grid.origin[0]) / res)))
    iz1 = min(grid.height - 1, int(math.ceil((max(zs) - grid.origin[1]) / res)))
    if ix1 < ix0 or iz1 < iz0:
        return set()
    gx, gz = np.meshgrid(np.arange(ix0, ix1 + 1), np.arange(iz0, iz1 + 1),
                         indexing="ij")
    cx = grid.origin[0] + (gx + 0.5) * res
    cz = grid.origin[1] + (gz + 0.5) * res
    mask = points_in_polygon(cx.ravel(), cz.ravel(), poly)
    return {(int(a), int(b)) for a, b in
            zip(gx.ravel()[mask], gz.ravel()[mask])}


def _cells_in_bbox(grid: OccupancyGrid, x0, z0, x1, z1, predicate) -> set[Cell]:
    res = grid.resolution
    ix0 = max(0, int(math.floor((x0 - grid.origin[0]) / res)))
    iz0 = max(0, int(math.floor((z0 - grid.origin[1]) / res)))
    ix1 = min(grid.width - 1, int(math.ceil((x1 - grid.origin[0]) / res)))
    iz1 = min(grid.height - 1, int(math.ceil((z1 - grid.origin[1]) / res)))
    out: set[Cell] = set()
    for ix in range(ix0, ix1 + 1):
        for iz in range(iz0, iz1 + 1):
            cx, cz = grid.center_of(ix, iz)
            if predicate(cx, cz):
                out.add((ix, iz))
    return out


# ---------------------------------------------------------------------------
# Goal resolution and start sampling

@dataclass(frozen=True)
class ResolvedGoal:
    region: GoalRegion
    cells: frozenset[Cell]
    threshold: float
    field: DistanceField
    label: str


def _point_pad(grid: OccupancyGrid) -> float:
    # Slightly over half a cell diagonal: the containing cell is always hit.
    return grid.resolution * 0.75


def goal_candidates(house: House, goal: GoalSpec,
                    grid: OccupancyGrid) -> list[tuple[str, GoalRegion, frozenset[Cell]]]:
    """Instances a goal spec can resolve to, with their grid cells.

    Object goals include door/window openings of the matching category since
    architectural openings are not scene objects.  Object footprint cells are
    blocked by construction, so their goal cells are the free band within the
    success threshold of the footprint.
    """
    if isinstance(goal, PointGoal):
        if goal.point is None:
            raise ValueError("unsampled point goal has no candidates")
        region = GoalRegion(points=(goal.point,))
        cells = cells_near_point(grid, goal.point, _point_pad(grid))
        return [("point", region, frozenset(cells))]

    if isinstance(goal, RoomGoal):
        rooms = [r for r in house.rooms if r.category == goal.room_class]
        if not rooms:
            raise UnsatisfiableGoalError(
                f"house {house.id} has no room of class {goal.room_class!r}"
            )
        out = []
        for r in rooms:
            region = GoalRegion(polygons=(r.floor_polygon,))
            cells = cells_in_polygon(grid, r.floor_polygon)
            out.append((f"room:{r.id}", region, frozenset(cells)))
        return out

    assert isinstance(goal, ObjectGoal)
    out = []
    for ob in house.objects:
        if ob.category == goal.category:
            rect = ob.footprint
            region = GoalRegion(rects=(rect,))
            cells = cells_near_rect(grid, rect, success_threshold(goal))
            out.append((f"object:{ob.id}", region, frozenset(cells)))
    if goal.category in ("door", "window"):
        for i, op in enumerate(house.openings):
            if op.kind != goal.category:
                continue
            wall = house.wall_by_id(op.wall_ref)
            if wall is None:
                continue
            seg = (wall.point_at(op.span[0]), wall.point_at(op.span[1]))
            region = GoalRegion(segments=(seg,))
            cells = cells_near_segment(grid, seg[0], seg[1], _point_pad(grid))
            out.append((f"{op.kind}:{op.wall_ref}#{i}", region, frozenset(cells)))
    if not out:
        raise UnsatisfiableGoalError(
            f"house {house.id} has no instance of category {goal.category!r}"
        )
    return out


def _merge_candidates(cands) -> tuple[str, GoalRegion, frozenset[Cell]]:
    if len(cands) == 1:
        return cands[0]
    region = GoalRegion(
        points=tuple(p for _, r, _ in cands for p in r.points),
        segments=tuple(s for _, r, _ in cands for s in r.segments),
        rects=tuple(x for _, r, _ in cands for x in r.rects),
        polygons=tuple(pg for _, r, _ in cands for pg in r.polygons),
    )
    cells = frozenset().union(*(c for _, _, c in cands))
    return ("any:" + "+".join(label for label, _, _ in cands), region, cells)


def sample_start_goal(house: House, goal: GoalSpec, rng_seed: int, *,
                      grid: OccupancyGrid | None = None,
                      agent_cfg: physics.AgentConfig | None = None,
                      min_path_dist: float | None = None,
                      max_tries: int = 200) -> tuple[physics.AgentState, ResolvedGoal]:
    """Sample a start pose and resolve the goal, both navigable.

    Deterministic in rng_seed.  The start is a uniformly drawn free cell
    center with uniform yaw, outside the success region, with a finite
    shortest-path distance to the goal (and at least min_path_dist when
    given).
    """
    cfg = agent_cfg or physics.AgentConfig()
    if grid is None:
        grid = build_grid(house, cfg.radius, min(0.1, cfg.radius))
    free_idx = grid.free_cells()
    if len(free_idx) == 0:
        raise SamplingError(f"house {house.id} has no free cells")

    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    threshold = success_threshold(goal)

    concrete_goal = goal
    if isinstance(goal, PointGoal) and goal.point is None:
        ix, iz = free_idx[int(rng.integers(len(free_idx)))]
        concrete_goal = PointGoal(point=grid.center_of(int(ix), int(iz)),
                                  success_radius=goal.success_radius)

    needs_start_first = isinstance(goal, ObjectGoal) and goal.select == "closest"
    resolved: ResolvedGoal | None = None
    if not needs_start_first:
        cands = goal_candidates(house, concrete_goal, grid)
        if isinstance(goal, ObjectGoal) and goal.select == "random":
            label, region, cells = cands[int(rng.integers(len(cands)))]
        else:
            label, region, cells = _merge_candidates(cands)
        field = distance_field(grid, cells)
        resolved = ResolvedGoal(region=region, cells=cells, threshold=threshold,
                                field=field, label=label)

    for _ in range(max_tries):
        ix, iz = free_idx[int(rng.integers(len(free_idx)))]
        cell = (int(ix), int(iz))
        yaw = float(rng.uniform(0.0, 2.0 * math.pi))
        pos = grid.center_of(*cell)

        if needs_start_first:
            cands = goal_candidates(house, concrete_goal, grid)
            start_field = distance_field(grid, [cell])
            best = None
            best_d = math.inf
            for label, region, cells in cands:
                d = min((start_field.dist[c] for c in cells), default=math.inf)
                if d < best_d:
                    best_d = d
                    best = (label, region, cells)
            if best is None or not math.isfinite(best_d):
                continue
            label, region, cells = best
            field = distance_field(grid, cells)
            resolved = ResolvedGoal(region=region, cells=cells, threshold=threshold,
                                    field=field, label=label)

        assert resolved is not None
        if resolved.region.distance(pos) <= threshold:
            continue  # must not start already succeeded
        d_start = resolved.field.dist[cell]
        if not math.isfinite(d_start):
            continue
        if min_path_dist is not None and d_start < min_path_dist:
            continue
        state = physics.AgentState(position=pos, yaw=yaw)
        return state, resolved

    raise SamplingError(
        f"no navigable start/goal pair for house {house.id} after {max_tries} tries"
    )
