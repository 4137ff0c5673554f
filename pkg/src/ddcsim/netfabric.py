"""Two-tier optical fabric: box switches -> rack switches -> one inter-rack switch.

Links are stored in flat arrays. Box ``b`` owns uplinks
``[b*U, (b+1)*U)`` to its rack switch; rack ``r`` owns uplinks
``[B*U + r*V, B*U + (r+1)*V)`` to the inter-rack switch.
"""
from __future__ import annotations

import copy
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AllocationError, ConfigError, IntegrityError
from .topology import DdcConfig, ResourceKind, units_required

INTRA, INTER = "intra", "inter"
INTRA_RACK, INTER_RACK = "intra_rack", "inter_rack"

# switching latency per class in seconds; placeholders, the trimming term dominates
DEFAULT_LAT_SW = {"box": 1.0e-6, "rack": 1.5e-6, "inter": 2.0e-6}

_EPS = 1e-9


def benes_cells(port_count: int) -> int:
    """Cells crossed by one path through a Benes switch with ``port_count`` ports."""
    if port_count < 2 or port_count & (port_count - 1):
        raise ConfigError(f"switch port count must be a power of two >= 2, got {port_count}")
    return 2 * int(math.log2(port_count)) - 1


@dataclass(frozen=True)
class SwitchSpec:
    switch_class: str
    port_count: int
    path_cell_count: int
    switch_latency: float


@dataclass(frozen=True)
class Link:
    link_id: int
    tier: str
    endpoint_a: str
    endpoint_b: str
    capacity_gbps: float
    allocated_gbps: float


@dataclass(frozen=True)
class NetPath:
    """One flow's circuit: a link per hop and the switches it crosses."""

    links: tuple
    switches: tuple
    reserved_gbps: float
    flow: str
    span: str

    @property
    def n_switches(self) -> int:
        return len(self.switches)


class Fabric:
    def __init__(self, config: DdcConfig, lat_sw=None):
        self.config = config
        lat_sw = dict(DEFAULT_LAT_SW, **(lat_sw or {}))
        self.switch_specs = {
            cls: SwitchSpec(cls, int(config.switch_ports[cls]),
                            benes_cells(int(config.switch_ports[cls])), float(lat_sw[cls]))
            for cls in ("box", "rack", "inter")
        }
        self.n_boxes = config.n_boxes
        self.per_box = config.uplinks_per_box
        self.per_rack = config.uplinks_per_rack
        self.n_box_links = self.n_boxes * self.per_box
        n = self.n_box_links + config.racks * self.per_rack
        self.capacity = np.full(n, float(config.link_capacity_gbps))
        self.allocated = np.zeros(n)
        self.tier = np.zeros(n, dtype=np.int8)
        self.tier[self.n_box_links:] = 1
        self.box_rack = np.repeat(np.arange(config.racks), config.boxes_per_rack)
        self._live = {}

    # -- layout ------------------------------------------------------------

    def box_links(self, box_id: int) -> tuple[int, int]:
        start = int(box_id) * self.per_box
        return start, start + self.per_box

    def rack_links(self, rack_id: int) -> tuple[int, int]:
        start = self.n_box_links + int(rack_id) * self.per_rack
        return start, start + self.per_rack

    def link(self, link_id: int) -> Link:
        link_id = int(link_id)
        if link_id < self.n_box_links:
            box = link_id // self.per_box
            a, b, tier = f"box{box}", f"rack{self.box_rack[box]}", INTRA
        else:
            rack = (link_id - self.n_box_links) // self.per_rack
            a, b, tier = f"rack{rack}", "inter", INTER
        return Link(link_id, tier, a, b, float(self.capacity[link_id]),
                    float(self.allocated[link_id]))

    @property
    def links(self) -> list[Link]:
        return [self.link(i) for i in range(self.capacity.shape[0])]

    def box_uplink_avail(self) -> np.ndarray:
        return kernels.group_avail(self.allocated, self.capacity, 0, self.n_boxes, self.per_box)

    def rack_uplink_avail(self) -> np.ndarray:
        return kernels.group_avail(self.allocated, self.capacity, self.n_box_links,
                                   self.config.racks, self.per_rack)

    # -- reservations ------------------------------------------------------

    def reserve(self, path: NetPath):
        if id(path) in self._live:
            raise IntegrityError("path object is already reserved")
        if len(set(path.links)) != len(path.links):
            raise ValueError("a path may not cross the same link twice")
        idx = list(path.links)
        after = self.allocated[idx] + path.reserved_gbps
        over = after > self.capacity[idx] + _EPS
        if over.any():
            raise AllocationError(f"reserving {path.reserved_gbps} Gb/s exceeds capacity on "
                                  f"links {[i for i, o in zip(idx, over) if o]}")
        self.allocated[idx] = after
        self._live[id(path)] = path

    def release_path(self, path: NetPath):
        if self._live.pop(id(path), None) is None:
            raise IntegrityError("path is not currently reserved (double release?)")
        idx = list(path.links)
        left = self.allocated[idx] - path.reserved_gbps
        # integer-valued rates cancel exactly; clamp float residue from fractional ones
        left[np.abs(left) < _EPS] = 0.0
        self.allocated[idx] = left

    @property
    def live_paths(self) -> list[NetPath]:
        return list(self._live.values())

    def digest(self) -> str:
        h = hashlib.sha256(self.allocated.tobytes())
        h.update(str(sorted(self._live)).encode())
        return h.hexdigest()

    def copy(self) -> "Fabric":
        dup = copy.copy(self)
        dup.allocated = self.allocated.copy()
        dup._live = dict(self._live)
        return dup


def build_fabric(config: DdcConfig, lat_sw=None) -> Fabric:
    return Fabric(config, lat_sw)


def bandwidth_demands(request, config: DdcConfig) -> tuple[float, float]:
    """(CPU<->RAM, RAM<->STO) Gb/s: per-unit rates times CPU and STO units."""
    rate = config.bandwidth_per_unit
    cpu = units_required(request, ResourceKind.CPU, config)
    sto = units_required(request, ResourceKind.STO, config)
    return float(rate["cpu_ram"] * cpu), float(rate["ram_sto"] * sto)


def _find_path(fabric: Fabric, src_box, dst_box, gbps, picker, flow):
    if src_box == dst_box:
        raise ValueError("flow endpoints must be distinct boxes")
    rs, rd = fabric.box_rack[src_box], fabric.box_rack[dst_box]
    hops = [fabric.box_links(src_box)]
    if rs == rd:
        switches, span = ("box", "rack", "box"), INTRA_RACK
    else:
        hops += [fabric.rack_links(rs), fabric.rack_links(rd)]
        switches, span = ("box", "rack", "inter", "rack", "box"), INTER_RACK
    hops.append(fabric.box_links(dst_box))
    links = []
    for start, stop in hops:
        j = picker(fabric.allocated, fabric.capacity, start, stop, float(gbps))
        if j < 0:
            return None
        links.append(int(j))
    return NetPath(tuple(links), switches, float(gbps), flow, span)


def find_path_first_fit(fabric, src_box, dst_box, gbps, flow="cpu_ram"):
    """Lowest-id link with room at every hop, or ``None``."""
    return _find_path(fabric, src_box, dst_box, gbps, kernels.pick_link_first, flow)


def find_path_max_avail(fabric, src_box, dst_box, gbps, flow="cpu_ram"):
    """Link with the most free bandwidth at every hop, or ``None``."""
    return _find_path(fabric, src_box, dst_box, gbps, kernels.pick_link_max, flow)


PATH_POLICIES = {"first_fit": find_path_first_fit, "max_avail": find_path_max_avail}


def route_flows(fabric, boxes, demands, policy="first_fit"):
    """Route and reserve both flows of a VM; roll back and return ``None`` on failure.

    ``boxes`` maps ResourceKind -> box id, ``demands`` is (cpu_ram, ram_sto).
    """
    find = PATH_POLICIES[policy]
    cpu, ram, sto = (boxes[k] for k in (ResourceKind.CPU, ResourceKind.RAM, ResourceKind.STO))
    first = find(fabric, cpu, ram, demands[0], "cpu_ram")
    if first is None:
        return None
    fabric.reserve(first)
    second = find(fabric, ram, sto, demands[1], "ram_sto")
    if second is None:
        fabric.release_path(first)
        return None
    fabric.reserve(second)
    return {"cpu_ram": first, "ram_sto": second}


def intra_rack_feasible(fabric, boxes, demands, policy="first_fit") -> bool:
    """Whether both flows fit on the rack's box uplinks, routed greedily in flow order.

    Leaves the fabric untouched.
    """
    racks = {int(fabric.box_rack[b]) for b in boxes.values()}
    if len(racks) != 1:
        return False
    paths = route_flows(fabric, boxes, demands, policy)
    if paths is None:
        return False
    for p in paths.values():
        fabric.release_path(p)
    return True


def utilization(fabric: Fabric) -> tuple[float, float]:
    """Instantaneous (intra, inter) fraction of link capacity in use."""
    n = fabric.n_box_links
    intra = fabric.allocated[:n].sum() / fabric.capacity[:n].sum()
    inter = fabric.allocated[n:].sum() / fabric.capacity[n:].sum()
    return float(intra), float(inter)
