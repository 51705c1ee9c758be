"""Numba kernels for the raycaster, occupancy grid, and circle collision.

All kernels are pure functions of their array arguments; callers own layout
and preallocation.  Shape arrays are SoA: center (cx, cz), unit u-axis
(ux, uz), half extents (hu, hv); the v-axis is (-uz, ux).
"""

from __future__ import annotations

import numba
import numpy as np

_EPS = 1e-12


@numba.njit(cache=True, fastmath=False)
def point_rect_distance(px, pz, cx, cz, ux, uz, hu, hv):
    rx = px - cx
    rz = pz - cz
    lu = rx * ux + rz * uz
    lv = -rx * uz + rz * ux
    du = abs(lu) - hu
    dv = abs(lv) - hv
    if du < 0.0:
        du = 0.0
    if dv < 0.0:
        dv = 0.0
    return np.sqrt(du * du + dv * dv)


@numba.njit(cache=True, fastmath=False)
def grid_blocked(origin_x, origin_z, resolution, nx, nz, radius,
                 cx, cz, ux, uz, hu, hv):
    """Occupancy bitmap: cell blocked iff the agent disc at its center
    touches any shape (closed intersection, distance <= radius)."""
    out = np.zeros((nx, nz), dtype=np.uint8)
    ns = cx.shape[0]
    for ix in range(nx):
        px = origin_x + (ix + 0.5) * resolution
        for iz in range(nz):
            pz = origin_z + (iz + 0.5) * resolution
            for s in range(ns):
                if point_rect_distance(px, pz, cx[s], cz[s], ux[s], uz[s],
                                       hu[s], hv[s]) <= radius:
                    out[ix, iz] = 1
                    break
    return out


@numba.njit(cache=True, fastmath=False)
def _sweep_circle_rect(px, pz, dx, dz, r, cx, cz, ux, uz, hu, hv):
    """Earliest t in [0, 1] where a circle moving along d contacts the rect.

    Returns (t, nx, nz, hit).  The normal points away from the rect surface,
    i.e. against the approach.  Grazing (non-approaching) candidates are
    ignored so tangential slides never re-collide.
    """
    rx = px - cx
    rz = pz - cz
    pu = rx * ux + rz * uz
    pv = -rx * uz + rz * ux
    du = dx * ux + dz * uz
    dv = -dx * uz + dz * ux

    # Touching contact: a previous slide can leave the gap at float zero, in
    # which case the face/corner candidates below would solve to a slightly
    # negative time and be discarded, letting the motion tunnel in.
    cu = min(max(pu, -hu), hu)
    cv = min(max(pv, -hv), hv)
    ou = pu - cu
    ov = pv - cv
    gap2 = ou * ou + ov * ov
    if gap2 <= r * r and gap2 > _EPS * _EPS:
        gap = np.sqrt(gap2)
        nu0 = ou / gap
        nv0 = ov / gap
        if du * nu0 + dv * nv0 < -_EPS:
            nx0 = nu0 * ux - nv0 * uz
            nz0 = nu0 * uz + nv0 * ux
            return 0.0, nx0, nz0, True
        # Touching but tangential or separating: this shape cannot obstruct.
        return 1.0, 0.0, 0.0, False

    best_t = 2.0
    best_nu = 0.0
    best_nv = 0.0

    # Flat faces of the Minkowski-expanded rect.
    if du < -_EPS:
        t = (hu + r - pu) / du
        if 0.0 <= t <= 1.0 and abs(pv + t * dv) <= hv and t < best_t:
            best_t = t
            best_nu = 1.0
            best_nv = 0.0
    if du > _EPS:
        t = (-hu - r - pu) / du
        if 0.0 <= t <= 1.0 and abs(pv + t * dv) <= hv and t < best_t:
            best_t = t
            best_nu = -1.0
            best_nv = 0.0
    if dv < -_EPS:
        t = (hv + r - pv) / dv
        if 0.0 <= t <= 1.0 and abs(pu + t * du) <= hu and t < best_t:
            best_t = t
            best_nu = 0.0
            best_nv = 1.0
    if dv > _EPS:
        t = (-hv - r - pv) / dv
        if 0.0 <= t <= 1.0 and abs(pu + t * du) <= hu and t < best_t:
            best_t = t
            best_nu = 0.0
            best_nv = -1.0

    # Corner circles.
    dd = du * du + dv * dv
    if dd > _EPS * _EPS:
        for su in (-1.0, 1.0):
            for sv in (-1.0, 1.0):
                qu = pu - su * hu
                qv = pv - sv * hv
                b = qu * du + qv * dv
                if b >= 0.0:
                    continue  # moving away from this corner
                c = qu * qu + qv * qv - r * r
                disc = b * b - dd * c
                if disc <= 0.0:
                    continue
                t = (-b - np.sqrt(disc)) / dd
                if 0.0 <= t <= 1.0 and t < best_t:
                    hu_t = qu + t * du
                    hv_t = qv + t * dv
                    ln = np.sqrt(hu_t * hu_t + hv_t * hv_t)
                    if ln > _EPS:
                        best_t = t
                        best_nu = hu_t / ln
                        best_nv = hv_t / ln

    if best_t > 1.0:
        return 1.0, 0.0, 0.0, False
    # Local normal (nu, nv) back to world.
    nx = best_nu * ux - best_nv * uz
    nz = best_nu * uz + best_nv * ux
    return best_t, nx, nz, True


@numba.njit(cache=True, fastmath=False)
def move_circle(px, pz, dx, dz, r, cx, cz, ux, uz, hu, hv,
                max_slides, backoff):
    """Move a circle with slide response; never penetrates any shape."""
    ns = cx.shape[0]
    # Depenetration guard for out-of-contract starting states.
    for _ in range(2):
        worst = -1.0
        wi = -1
        for s in range(ns):
            d = point_rect_distance(px, pz, cx[s], cz[s], ux[s], uz[s], hu[s], hv[s])
            pen = r - d
            if pen > backoff and pen > worst:
                worst = pen
                wi = s
        if wi < 0:
            break
        qx = px - cx[wi]
        qz = pz - cz[wi]
        lu = qx * ux[wi] + qz * uz[wi]
        lv = -qx * uz[wi] + qz * ux[wi]
        cu = min(max(lu, -hu[wi]), hu[wi])
        cv = min(max(lv, -hv[wi]), hv[wi])
        ou = lu - cu
        ov = lv - cv
        ln = np.sqrt(ou * ou + ov * ov)
        if ln > _EPS:
            nu, nv = ou / ln, ov / ln
            push = r - ln + backoff
        else:
            # Center inside the rect core: push along the closest face.
            if hu[wi] - abs(lu) < hv[wi] - abs(lv):
                nu = 1.0 if lu >= 0.0 else -1.0
                nv = 0.0
                push = hu[wi] - abs(lu) + r + backoff
            else:
                nu = 0.0
                nv = 1.0 if lv >= 0.0 else -1.0
                push = hv[wi] - abs(lv) + r + backoff
        px += (nu * ux[wi] - nv * uz[wi]) * push
        pz += (nu * uz[wi] + nv * ux[wi]) * push

    for _ in range(max_slides):
        mag2 = dx * dx + dz * dz
        if mag2 < 1e-24:
            break
        t_min = 1.0
        hit = False
        nx = 0.0
        nz = 0.0
        for s in range(ns):
            t, snx, snz, ok = _sweep_circle_rect(px, pz, dx, dz, r,
                                                 cx[s], cz[s], ux[s], uz[s],
                                                 hu[s], hv[s])
            if ok and t < t_min:
                t_min = t
                nx = snx
                nz = snz
                hit = True
        if not hit:
            px += dx
            pz += dz
            break
        adv = t_min - backoff / np.sqrt(mag2)
        if adv < 0.0:
            adv = 0.0
        px += dx * adv
        pz += dz * adv
        rem = 1.0 - t_min
        if rem < 0.0:
            rem = 0.0
        rx = dx * rem
        rz = dz * rem
        dot = rx * nx + rz * nz
        dx = rx - dot * nx
        dz = rz - dot * nz
    return px, pz


@numba.njit(cache=True, fastmath=False)
def query_contacts(px, pz, reach, cx, cz, ux, uz, hu, hv, eligible, out_dirs):
    """Directions from the agent center to every touched shape surface.

    Fills out_dirs (K, 2) and returns the count; shapes with eligible == 0
    are skipped (contact-sensor height filtering).
    """
    count = 0
    ns = cx.shape[0]
    for s in range(ns):
        if eligible[s] == 0:
            continue
        rx = px - cx[s]
        rz = pz - cz[s]
        lu = rx * ux[s] + rz * uz[s]
        lv = -rx * uz[s] + rz * ux[s]
        cu = min(max(lu, -hu[s]), hu[s])
        cv = min(max(lv, -hv[s]), hv[s])
        ou = lu - cu
        ov = lv - cv
        dist = np.sqrt(ou * ou + ov * ov)
        if dist > reach or dist <= _EPS:
            continue
        # Direction agent -> surface, in world frame.
        nu = -ou / dist
        nv = -ov / dist
        if count < out_dirs.shape[0]:
            out_dirs[count, 0] = nu * ux[s] - nv * uz[s]
            out_dirs[count, 1] = nu * uz[s] + nv * ux[s]
            count += 1
    return count


@numba.njit(cache=True, fastmath=False)
def dijkstra_steps(free, goal_ix, goal_iz, res, diag):
    """Multi-source Dijkstra tracking integer (axial, diagonal) step counts.

    Path costs are compared through the float key a*res + d*diag; for grid
    scales the key order matches the exact order of a + d*sqrt(2), so the
    returned counts are implementation-independent.  Diagonal moves require
    both flanking axial cells free (no corner cutting).  Blocked goal cells
    keep (0, 0) but are neither expanded nor traversed.
    """
    nx, nz = free.shape
    steps_a = np.full((nx, nz), -1, dtype=np.int32)
    steps_d = np.full((nx, nz), -1, dtype=np.int32)

    cap = 8 * nx * nz + 16
    heap_key = np.empty(cap, dtype=np.float64)
    heap_a = np.empty(cap, dtype=np.int32)
    heap_d = np.empty(cap, dtype=np.int32)
    heap_ix = np.empty(cap, dtype=np.int32)
    heap_iz = np.empty(cap, dtype=np.int32)
    size = 0

    for g in range(goal_ix.shape[0]):
        ix, iz = goal_ix[g], goal_iz[g]
        if steps_a[ix, iz] == 0:
            continue
        steps_a[ix, iz] = 0
        steps_d[ix, iz] = 0
        if free[ix, iz]:
            heap_key[size] = 0.0
            heap_a[size] = 0
            heap_d[size] = 0
            heap_ix[size] = ix
            heap_iz[size] = iz
            size += 1
            k = size - 1
            while k > 0:
                parent = (k - 1) // 2
                if heap_key[k] < heap_key[parent]:
                    _heap_swap(heap_key, heap_a, heap_d, heap_ix, heap_iz, k, parent)
                    k = parent
                else:
                    break

    while size > 0:
        key = heap_key[0]
        a = heap_a[0]
        d = heap_d[0]
        ix = heap_ix[0]
        iz = heap_iz[0]
        size -= 1
        if size > 0:
            heap_key[0] = heap_key[size]
            heap_a[0] = heap_a[size]
            heap_d[0] = heap_d[size]
            heap_ix[0] = heap_ix[size]
            heap_iz[0] = heap_iz[size]
            k = 0
            while True:
                left = 2 * k + 1
                right = left + 1
                smallest = k
                if left < size and heap_key[left] < heap_key[smallest]:
                    smallest = left
                if right < size and heap_key[right] < heap_key[smallest]:
                    smallest = right
                if smallest == k:
                    break
                _heap_swap(heap_key, heap_a, heap_d, heap_ix, heap_iz, k, smallest)
                k = smallest
        if steps_a[ix, iz] != a or steps_d[ix, iz] != d:
            continue  # stale entry

        for move in range(8):
            if move == 0:
                dx, dz, diag_move = 1, 0, False
            elif move == 1:
                dx, dz, diag_move = -1, 0, False
            elif move == 2:
                dx, dz, diag_move = 0, 1, False
            elif move == 3:
                dx, dz, diag_move = 0, -1, False
            elif move == 4:
                dx, dz, diag_move = 1, 1, True
            elif move == 5:
                dx, dz, diag_move = 1, -1, True
            elif move == 6:
                dx, dz, diag_move = -1, 1, True
            else:
                dx, dz, diag_move = -1, -1, True
            jx = ix + dx
            jz = iz + dz
            if jx < 0 or jx >= nx or jz < 0 or jz >= nz:
                continue
            if not free[jx, jz]:
                continue
            if diag_move and not (free[ix + dx, iz] and free[ix, iz + dz]):
                continue
            na = a + 1 if not diag_move else a
            nd = d if not diag_move else d + 1
            nkey = na * res + nd * diag
            old_a = steps_a[jx, jz]
            if old_a >= 0:
                old_key = old_a * res + steps_d[jx, jz] * diag
                if nkey >= old_key:
                    continue
            steps_a[jx, jz] = na
            steps_d[jx, jz] = nd
            heap_key[size] = nkey
            heap_a[size] = na
            heap_d[size] = nd
            heap_ix[size] = jx
            heap_iz[size] = jz
            size += 1
            k = size - 1
            while k > 0:
                parent = (k - 1) // 2
                if heap_key[k] < heap_key[parent]:
                    _heap_swap(heap_key, heap_a, heap_d, heap_ix, heap_iz, k, parent)
                    k = parent
                else:
                    break
    return steps_a, steps_d


@numba.njit(cache=True, fastmath=False)
def _heap_swap(key, a, d, ix, iz, i, j):
    key[i], key[j] = key[j], key[i]
    a[i], a[j] = a[j], a[i]
    d[i], d[j] = d[j], d[i]
    ix[i], ix[j] = ix[j], ix[i]
    iz[i], iz[j] = iz[j], iz[i]


@numba.njit(cache=True, fastmath=False)
def _point_in_poly(px, pz, vx, vz, start, n):
    inside = False
    j = start + n - 1
    for k in range(start, start + n):
        zi = vz[k]
        zj = vz[j]
        if (zi > pz) != (zj > pz):
            xint = vx[k] + (pz - zi) * (vx[j] - vx[k]) / (zj - zi)
            if px < xint:
                inside = not inside
        j = k
    return inside


@numba.njit(cache=True, fastmath=False)
def raycast(ox, oy, oz, dirs, order, min_dist,
            bcx, bcz, bux, buz, bhu, bhv, by0, by1, balb, bsem, binst,
            pvx, pvz, poff, pcnt, py, pny, palb, psem, pinst, pbb,
            near, far,
            out_t, out_n, out_sem, out_inst, out_alb):
    """Nearest-hit raycast against boxes and horizontal polygons.

    Boxes are visited in `order` (sorted by conservative camera distance,
    precomputed in min_dist) so the loop can stop early.  A miss leaves
    out_t at far; hits strictly closer than far fill the remaining buffers.
    """
    nrays = dirs.shape[0]
    nboxes = bcx.shape[0]
    npolys = py.shape[0]
    for i in range(nrays):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        best = far
        bnx = 0.0
        bny = 0.0
        bnz = 0.0
        sem = 0
        inst = 0
        alb = 0.0

        for k in range(npolys):
            if abs(dy) < _EPS:
                continue
            t = (py[k] - oy) / dy
            if t < near or t >= best:
                continue
            hx = ox + t * dx
            hz = oz + t * dz
            if hx < pbb[k, 0] or hx > pbb[k, 1] or hz < pbb[k, 2] or hz > pbb[k, 3]:
                continue
            if _point_in_poly(hx, hz, pvx, pvz, poff[k], pcnt[k]):
                best = t
                bnx = 0.0
                bny = pny[k]
                bnz = 0.0
                sem = psem[k]
                inst = pinst[k]
                alb = palb[k]

        for oi in range(nboxes):
            s = order[oi]
            if min_dist[s] >= best:
                break
            # Transform into the box frame: axes (u, y, v).
            rx = ox - bcx[s]
            rz = oz - bcz[s]
            pu = rx * bux[s] + rz * buz[s]
            pv = -rx * buz[s] + rz * bux[s]
            du = dx * bux[s] + dz * buz[s]
            dv = -dx * buz[s] + dz * bux[s]

            t_enter = -np.inf
            t_exit = np.inf
            axis = -1
            sign = 0.0
            ok = True
            for a in range(3):
                if a == 0:
                    o_, d_, lo, hi = pu, du, -bhu[s], bhu[s]
                elif a == 1:
                    o_, d_, lo, hi = oy, dy, by0[s], by1[s]
                else:
                    o_, d_, lo, hi = pv, dv, -bhv[s], bhv[s]
                if abs(d_) < _EPS:
                    if o_ < lo or o_ > hi:
                        ok = False
                        break
                else:
                    inv = 1.0 / d_
                    ta = (lo - o_) * inv
                    tb = (hi - o_) * inv
                    if ta > tb:
                        ta, tb = tb, ta
                    if ta > t_enter:
                        t_enter = ta
                        axis = a
                        sign = -1.0 if d_ > 0.0 else 1.0
                    if tb < t_exit:
                        t_exit = tb
                    if t_enter > t_exit:
                        ok = False
                        break
            if not ok or t_exit < near:
                continue
            if t_enter < near:
                # Camera inside the box: shade the near cap facing it.
                if near < best:
                    best = near
                    bnx = -dx
                    bny = -dy
                    bnz = -dz
                    sem = bsem[s]
                    inst = binst[s]
                    alb = balb[s]
                continue
            if t_enter < best:
                best = t_enter
                sem = bsem[s]
                inst = binst[s]
                alb = balb[s]
                if axis == 0:
                    bnx = sign * bux[s]
                    bny = 0.0
                    bnz = sign * buz[s]
                elif axis == 1:
                    bnx = 0.0
                    bny = sign
                    bnz = 0.0
                else:
                    bnx = -sign * buz[s]
                    bny = 0.0
                    bnz = sign * bux[s]

        out_t[i] = best
        out_n[i, 0] = bnx
        out_n[i, 1] = bny
        out_n[i, 2] = bnz
        out_sem[i] = sem
        out_inst[i] = inst
        out_alb[i] = alb
