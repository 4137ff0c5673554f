"""Vectorized numpy implementations of the scheduling kernels."""
import numpy as np

EPS = 1e-9


def rack_argmax(avail, start, stop):
    return start + int(np.argmax(avail[start:stop]))


def intra_pool_mask(avail, rack_max, need):
    return np.all(avail[rack_max] >= need[None, :], axis=1)


def super_rack_mask(avail, box_rack, box_kind, need, n_racks):
    out = np.zeros((n_racks, 3), dtype=bool)
    ok = avail >= need[box_kind]
    out[box_rack[ok], box_kind[ok]] = True
    return out


def _first(idx):
    return int(idx[0]) if idx.size else -1


def next_fit(avail, start, stop, cursor, need):
    if not start <= cursor < stop:
        cursor = start
    order = np.roll(np.arange(start, stop), start - cursor)
    return _first(order[avail[order] >= need])


def best_fit(avail, start, stop, need):
    seg = avail[start:stop]
    fits = seg >= need
    if not fits.any():
        return -1
    # np.argmin returns the first (lowest id) minimum
    return start + int(np.argmin(np.where(fits, seg, np.iinfo(seg.dtype).max)))


def rack_next_fit(avail, ranges, cursor, need):
    return np.array([next_fit(avail, ranges[k, 0], ranges[k, 1], cursor[k], need[k])
                     for k in range(3)], dtype=np.int64)


def rack_best_fit(avail, ranges, need):
    return np.array([best_fit(avail, ranges[k, 0], ranges[k, 1], need[k]) for k in range(3)],
                    dtype=np.int64)


def first_fit_masked(avail, box_ids, box_rack, rack_mask, need):
    ok = rack_mask[box_rack[box_ids]] & (avail[box_ids] >= need)
    return _first(box_ids[ok])


def bfs_find(avail, box_rack, box_kind, rack_start, box_bw,
             origin, need, want, kind_rack_mask, by_bandwidth):
    # visit order: home rack, then other racks ascending; inside a rack by id,
    # or by descending box_bw when by_bandwidth
    home = box_rack[origin]
    box_key = -box_bw if by_bandwidth else np.zeros(avail.shape[0])
    ids = np.arange(avail.shape[0])
    level = np.where(box_rack == home, -1, box_rack)
    order = np.lexsort((ids, box_key, level))
    order = order[order != origin]

    found = np.full(3, -1, dtype=np.int64)
    for k in range(3):
        if not want[k]:
            continue
        ok = ((box_kind[order] == k)
              & kind_rack_mask[box_rack[order], k]
              & (avail[order] >= need[k]))
        found[k] = _first(order[ok])
    return found


def pick_link_first(alloc, cap, start, stop, gbps):
    hits = np.flatnonzero(cap[start:stop] - alloc[start:stop] >= gbps - EPS)
    return start + int(hits[0]) if hits.size else -1


def pick_link_max(alloc, cap, start, stop, gbps):
    free = cap[start:stop] - alloc[start:stop]
    j = int(np.argmax(free))
    return start + j if free[j] >= gbps - EPS else -1


def group_avail(alloc, cap, start, n_groups, per_group):
    stop = start + n_groups * per_group
    return (cap[start:stop] - alloc[start:stop]).reshape(n_groups, per_group).sum(axis=1)


def time_weighted_mean(times, values, t_end):
    m = values.shape[1]
    if times.shape[0] == 0 or t_end <= times[0]:
        return np.zeros(m)
    dt = np.diff(np.append(times, t_end))
    return (values * dt[:, None]).sum(axis=0) / (t_end - times[0])
