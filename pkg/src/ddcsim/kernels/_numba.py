"""Loop kernels compiled with numba.

Each function mirrors one in ``_numpy`` and must return identical results;
``tests/test_kernels.py`` checks the pairs against each other.
"""
import numpy as np
from numba import njit

EPS = 1e-9

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def rack_argmax(avail, start, stop):
    best = start
    for i in range(start + 1, stop):
        if avail[i] > avail[best]:
            best = i
    return best


@njit(**_opts)
def intra_pool_mask(avail, rack_max, need):
    n_racks = rack_max.shape[0]
    out = np.ones(n_racks, dtype=np.bool_)
    for r in range(n_racks):
        for k in range(rack_max.shape[1]):
            if avail[rack_max[r, k]] < need[k]:
                out[r] = False
                break
    return out


@njit(**_opts)
def super_rack_mask(avail, box_rack, box_kind, need, n_racks):
    out = np.zeros((n_racks, 3), dtype=np.bool_)
    for b in range(avail.shape[0]):
        k = box_kind[b]
        if avail[b] >= need[k]:
            out[box_rack[b], k] = True
    return out


@njit(**_opts)
def next_fit(avail, start, stop, cursor, need):
    if cursor < start or cursor >= stop:
        cursor = start
    width = stop - start
    for step in range(width):
        i = start + (cursor - start + step) % width
        if avail[i] >= need:
            return i
    return -1


@njit(**_opts)
def best_fit(avail, start, stop, need):
    # ascending by available units, stable so ties keep the lowest id
    order = np.argsort(avail[start:stop], kind="mergesort")
    for j in range(order.shape[0]):
        i = start + order[j]
        if avail[i] >= need:
            return i
    return -1


@njit(**_opts)
def rack_next_fit(avail, ranges, cursor, need):
    out = np.full(3, -1, dtype=np.int64)
    for k in range(3):
        out[k] = next_fit(avail, ranges[k, 0], ranges[k, 1], cursor[k], need[k])
    return out


@njit(**_opts)
def rack_best_fit(avail, ranges, need):
    out = np.full(3, -1, dtype=np.int64)
    for k in range(3):
        out[k] = best_fit(avail, ranges[k, 0], ranges[k, 1], need[k])
    return out


@njit(**_opts)
def first_fit_masked(avail, box_ids, box_rack, rack_mask, need):
    for j in range(box_ids.shape[0]):
        b = box_ids[j]
        if rack_mask[box_rack[b]] and avail[b] >= need:
            return b
    return -1


@njit(**_opts)
def _ordered(ids, weight, by_weight):
    if not by_weight:
        return ids
    w = np.empty(ids.shape[0], dtype=np.float64)
    for j in range(ids.shape[0]):
        w[j] = -weight[ids[j]]
    return ids[np.argsort(w, kind="mergesort")]


@njit(**_opts)
def bfs_find(avail, box_rack, box_kind, rack_start, box_bw,
             origin, need, want, kind_rack_mask, by_bandwidth):
    # tree graph: boxes 0..B-1, rack switches B..B+R-1, inter-rack switch B+R;
    # with by_bandwidth a rack switch lists its boxes by descending box_bw
    n_boxes = avail.shape[0]
    n_racks = rack_start.shape[0] - 1
    inter = n_boxes + n_racks
    found = np.full(3, -1, dtype=np.int64)
    missing = 0
    for k in range(3):
        if want[k]:
            missing += 1
    if missing == 0:
        return found

    visited = np.zeros(inter + 1, dtype=np.bool_)
    queue = np.empty(inter + 1, dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = origin
    tail += 1
    visited[origin] = True
    rack_nodes = np.arange(n_racks) + n_boxes

    while head < tail:
        node = queue[head]
        head += 1
        if node < n_boxes:
            if node != origin:
                k = box_kind[node]
                if (want[k] and found[k] < 0
                        and kind_rack_mask[box_rack[node], k]
                        and avail[node] >= need[k]):
                    found[k] = node
                    missing -= 1
                    if missing == 0:
                        return found
            nbrs = np.empty(1, dtype=np.int64)
            nbrs[0] = n_boxes + box_rack[node]
        elif node < inter:
            r = node - n_boxes
            boxes = np.arange(rack_start[r], rack_start[r + 1])
            boxes = _ordered(boxes, box_bw, by_bandwidth)
            nbrs = np.empty(boxes.shape[0] + 1, dtype=np.int64)
            nbrs[:boxes.shape[0]] = boxes
            nbrs[boxes.shape[0]] = inter
        else:
            nbrs = rack_nodes
        for j in range(nbrs.shape[0]):
            v = nbrs[j]
            if not visited[v]:
                visited[v] = True
                queue[tail] = v
                tail += 1
    return found


@njit(**_opts)
def pick_link_first(alloc, cap, start, stop, gbps):
    for i in range(start, stop):
        if cap[i] - alloc[i] >= gbps - EPS:
            return i
    return -1


@njit(**_opts)
def pick_link_max(alloc, cap, start, stop, gbps):
    best = start
    for i in range(start + 1, stop):
        if cap[i] - alloc[i] > cap[best] - alloc[best]:
            best = i
    if cap[best] - alloc[best] >= gbps - EPS:
        return best
    return -1


@njit(**_opts)
def group_avail(alloc, cap, start, n_groups, per_group):
    out = np.zeros(n_groups, dtype=np.float64)
    for g in range(n_groups):
        base = start + g * per_group
        for i in range(base, base + per_group):
            out[g] += cap[i] - alloc[i]
    return out


@njit(**_opts)
def time_weighted_mean(times, values, t_end):
    n, m = values.shape
    out = np.zeros(m, dtype=np.float64)
    if n == 0 or t_end <= times[0]:
        return out
    for i in range(n):
        t_next = times[i + 1] if i + 1 < n else t_end
        dt = t_next - times[i]
        for j in range(m):
            out[j] += values[i, j] * dt
    span = t_end - times[0]
    for j in range(m):
        out[j] /= span
    return out
