"""VM placement heuristics: NULB, NALB, RISA and RISA-BF.

All four share one contract: ``place(state, fabric, request)`` either
commits compute units and network reservations and returns a ``Placement``,
or returns ``None`` and leaves both ``state`` and ``fabric`` untouched.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .netfabric import INTER_RACK, INTRA_RACK, Fabric, bandwidth_demands, route_flows
from .topology import KINDS, ClusterState, contention_ratios, demand_units, scarcest_kind

FIRST_FIT, BEST_FIT = "first_fit", "best_fit"


@dataclass
class Placement:
    vm_id: int
    box_of: dict
    paths: dict
    span: str
    units: tuple = (0, 0, 0)
    via: str = "nulb"

    @property
    def inter_rack(self) -> bool:
        return self.span == INTER_RACK

    @property
    def boxes(self) -> tuple:
        return tuple(self.box_of[k] for k in KINDS)


@dataclass
class RoundRobinCursor:
    """Rack the last intra-rack placement went to, plus per-(rack, kind) fill positions.

    ``box_cursor[r, k]`` is the box that last took a VM of kind ``k`` in rack
    ``r`` (-1 before the first one).
    """

    last_rack_index: int | None = None
    box_cursor: np.ndarray | None = None

    def fill_positions(self, n_racks):
        if self.box_cursor is None:
            self.box_cursor = np.full((n_racks, 3), -1, dtype=np.int64)
        return self.box_cursor

    def rotation(self, racks):
        """``racks`` (ascending) reordered to start just after the last used rack."""
        racks = list(racks)
        if self.last_rack_index is None:
            return racks
        after = [r for r in racks if r > self.last_rack_index]
        return after + [r for r in racks if r <= self.last_rack_index]


def build_intra_rack_pool(state: ClusterState, request, need=None) -> list[int]:
    """Racks whose max-available box of every kind can host the whole VM."""
    if need is None:
        need = demand_units(request, state.config)
    mask = kernels.intra_pool_mask(state.avail, state.rack_max, need)
    return [int(r) for r in np.flatnonzero(mask)]


def build_super_rack(state: ClusterState, request, need=None) -> dict:
    """Per kind, the racks holding at least one box that fits that kind's demand."""
    if need is None:
        need = demand_units(request, state.config)
    mask = kernels.super_rack_mask(state.avail, state.box_rack, state.box_kind, need,
                                   state.config.racks)
    return {k: [int(r) for r in np.flatnonzero(mask[:, k])] for k in KINDS}


def _rack_mask(state, candidate_racks):
    R = state.config.racks
    mask = np.zeros((R, 3), dtype=np.bool_)
    if candidate_racks is None:
        mask[:] = True
    elif isinstance(candidate_racks, Mapping):
        for k in KINDS:
            mask[list(candidate_racks.get(k, ())), k] = True
    else:
        mask[list(candidate_racks), :] = True
    return mask


def _commit(state, request, boxes, need, paths, via):
    for k in KINDS:
        state.allocate(boxes[k], need[k])
    racks = {int(state.box_rack[b]) for b in boxes.values()}
    span = INTRA_RACK if len(racks) == 1 else INTER_RACK
    return Placement(request.vm_id, dict(boxes), paths, span,
                     tuple(int(u) for u in need), via)


def nulb(state: ClusterState, fabric: Fabric, candidate_racks, request,
         path_policy: str = "first_fit"):
    """Scarcest-kind-first placement with a BFS for the companion boxes.

    ``candidate_racks`` is ``None`` (whole cluster), a rack sequence, or a
    per-kind mapping such as the one ``build_super_rack`` returns.
    ``path_policy="max_avail"`` gives NALB: companion boxes inside a rack
    are visited in descending order of free uplink bandwidth and each hop
    takes the emptiest link.
    """
    need = demand_units(request, state.config)
    scarce = scarcest_kind(contention_ratios(state, request))
    mask = _rack_mask(state, candidate_racks)
    origin = kernels.first_fit_masked(state.avail, state.kind_boxes[scarce], state.box_rack,
                                      mask[:, scarce], need[scarce])
    if origin < 0:
        return None

    network_aware = path_policy == "max_avail"
    box_bw = fabric.box_uplink_avail() if network_aware else np.zeros(state.n_boxes)
    want = np.ones(3, dtype=np.bool_)
    want[scarce] = False
    found = kernels.bfs_find(state.avail, state.box_rack, state.box_kind, state.rack_start,
                             box_bw, origin, need, want, mask, network_aware)
    found[scarce] = origin
    if np.any(found < 0):
        return None

    boxes = {k: int(found[k]) for k in KINDS}
    paths = route_flows(fabric, boxes, bandwidth_demands(request, state.config), path_policy)
    if paths is None:
        return None
    return _commit(state, request, boxes, need, paths, "nalb" if network_aware else "nulb")


def _pick_in_rack(state, fill, rack, need, fit):
    if fit == BEST_FIT:
        found = kernels.rack_best_fit(state.avail, state.kind_range[rack], need)
    else:
        found = kernels.rack_next_fit(state.avail, state.kind_range[rack], fill[rack], need)
    if np.any(found < 0):
        return None
    return {k: int(found[k]) for k in KINDS}


def risa(state: ClusterState, fabric: Fabric, cursor: RoundRobinCursor, request,
         fit: str = FIRST_FIT):
    """Round-robin intra-rack placement with a NULB fallback over the super rack.

    With ``fit="first_fit"`` boxes in a rack are filled in id order,
    continuing from the box that took the previous VM in that rack (box 0
    until it no longer fits, then box 1, ...). ``fit="best_fit"`` takes the
    box with the least sufficient availability.
    """
    if fit not in (FIRST_FIT, BEST_FIT):
        raise ValueError(f"fit must be {FIRST_FIT!r} or {BEST_FIT!r}, got {fit!r}")
    need = demand_units(request, state.config)
    pool = build_intra_rack_pool(state, request, need)
    if pool:
        demands = bandwidth_demands(request, state.config)
        fill = cursor.fill_positions(state.config.racks)
        for rack in cursor.rotation(pool):
            boxes = _pick_in_rack(state, fill, rack, need, fit)
            if boxes is None:
                continue
            paths = route_flows(fabric, boxes, demands, "first_fit")
            if paths is None:
                continue
            placement = _commit(state, request, boxes, need, paths, "intra_pool")
            cursor.last_rack_index = rack
            fill[rack] = [boxes[k] for k in KINDS]
            return placement
    return nulb(state, fabric, build_super_rack(state, request, need), request, "first_fit")


def release_placement(state: ClusterState, fabric: Fabric, placement: Placement):
    for k in KINDS:
        state.release(placement.box_of[k], placement.units[k])
    for path in placement.paths.values():
        fabric.release_path(path)


class Scheduler:
    """A named placement policy plus whatever per-run memory it needs."""

    name = ""

    def reset(self):
        pass

    def place(self, state, fabric, request):
        raise NotImplementedError


class NulbScheduler(Scheduler):
    def __init__(self, path_policy="first_fit"):
        self.path_policy = path_policy
        self.name = "nalb" if path_policy == "max_avail" else "nulb"

    def place(self, state, fabric, request):
        return nulb(state, fabric, None, request, self.path_policy)


class RisaScheduler(Scheduler):
    def __init__(self, fit=FIRST_FIT):
        self.fit = fit
        self.name = "risa-bf" if fit == BEST_FIT else "risa"
        self.cursor = RoundRobinCursor()

    def reset(self):
        self.cursor = RoundRobinCursor()

    def place(self, state, fabric, request):
        return risa(state, fabric, self.cursor, request, self.fit)


ALGORITHMS = {
    "nulb": lambda: NulbScheduler("first_fit"),
    "nalb": lambda: NulbScheduler("max_avail"),
    "risa": lambda: RisaScheduler(FIRST_FIT),
    "risa-bf": lambda: RisaScheduler(BEST_FIT),
}


def make_scheduler(name: str) -> Scheduler:
    try:
        return ALGORITHMS[name.strip().lower()]()
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; valid names: "
                         f"{', '.join(ALGORITHMS)}") from None
