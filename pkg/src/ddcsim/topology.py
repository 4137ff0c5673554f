"""Disaggregated resource hierarchy: cluster -> racks -> boxes -> bricks -> units.

Boxes carry a global id assigned rack-major; inside a rack the boxes are
grouped by kind in the order CPU, RAM, STO. Every (rack, kind) group is
therefore a contiguous id range, which the scan kernels rely on.
"""
from __future__ import annotations

import copy
import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .errors import AllocationError, ConfigError, IntegrityError


class ResourceKind(enum.IntEnum):
    CPU = 0
    RAM = 1
    STO = 2

    @classmethod
    def parse(cls, value) -> "ResourceKind":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ConfigError(f"unknown resource kind {value!r}") from None
        return cls(int(value))


KINDS = tuple(ResourceKind)
# physical unit name per kind, used in reports only
QUANTITY_NAME = {ResourceKind.CPU: "cores", ResourceKind.RAM: "GB", ResourceKind.STO: "GB"}

SWITCH_CLASSES = ("box", "rack", "inter")
FLOWS = ("cpu_ram", "ram_sto")


def _kind_map(raw, what):
    try:
        out = {ResourceKind.parse(k): v for k, v in dict(raw).items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from None
    missing = [k.name for k in KINDS if k not in out]
    if missing:
        raise ConfigError(f"{what} is missing kinds {missing}")
    return out


def _name_map(raw, names, what):
    out = dict(raw)
    missing = [n for n in names if n not in out]
    unknown = [n for n in out if n not in names]
    if missing or unknown:
        raise ConfigError(f"{what}: expected keys {list(names)}, got {sorted(out)}")
    return out


@dataclass(frozen=True)
class DdcConfig:
    """Static description of a disaggregated cluster and its fabric.

    Defaults reproduce the 18-rack reference cluster: 6 boxes per rack split
    2/2/2 across CPU, RAM and storage, 8 bricks of 16 units per box, with
    4-core CPU units, 4 GB RAM units and 64 GB storage units.
    """

    racks: int = 18
    boxes_per_rack: int = 6
    layout: Mapping = field(default_factory=lambda: {ResourceKind.CPU: 2, ResourceKind.RAM: 2,
                                                     ResourceKind.STO: 2})
    bricks_per_box: int = 8
    units_per_brick: int = 16
    unit_size: Mapping = field(default_factory=lambda: {ResourceKind.CPU: 4, ResourceKind.RAM: 4,
                                                        ResourceKind.STO: 64})
    link_capacity_gbps: float = 200.0
    uplinks_per_box: int = 8
    uplinks_per_rack: int = 8
    switch_ports: Mapping = field(default_factory=lambda: {"box": 64, "rack": 256, "inter": 512})
    bandwidth_per_unit: Mapping = field(default_factory=lambda: {"cpu_ram": 5.0, "ram_sto": 1.0})

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "layout", _kind_map(self.layout, "layout"))
        set_(self, "unit_size", _kind_map(self.unit_size, "unit_size"))
        set_(self, "switch_ports", _name_map(self.switch_ports, SWITCH_CLASSES, "switch_ports"))
        set_(self, "bandwidth_per_unit",
             _name_map(self.bandwidth_per_unit, FLOWS, "bandwidth_per_unit"))
        for name in ("racks", "boxes_per_rack", "bricks_per_box", "units_per_brick",
                     "uplinks_per_box", "uplinks_per_rack"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {value!r}")
        for kind, count in self.layout.items():
            if int(count) < 1:
                raise ConfigError(f"layout[{kind.name}] must be >= 1, got {count}")
        if sum(self.layout.values()) != self.boxes_per_rack:
            raise ConfigError(
                f"layout sums to {sum(self.layout.values())} boxes but boxes_per_rack is "
                f"{self.boxes_per_rack}")
        for kind, size in self.unit_size.items():
            if not size > 0:
                raise ConfigError(f"unit_size[{kind.name}] must be positive")
        if not self.link_capacity_gbps > 0:
            raise ConfigError("link_capacity_gbps must be positive")
        for flow, rate in self.bandwidth_per_unit.items():
            if rate < 0:
                raise ConfigError(f"bandwidth_per_unit[{flow}] must be >= 0")

    @property
    def box_capacity_units(self) -> int:
        return self.bricks_per_box * self.units_per_brick

    @property
    def n_boxes(self) -> int:
        return self.racks * self.boxes_per_rack

    def box_capacity(self, kind) -> float:
        """Physical capacity of one box of ``kind`` (cores or GB)."""
        return self.box_capacity_units * self.unit_size[ResourceKind.parse(kind)]

    def to_dict(self) -> dict:
        return {
            "racks": self.racks,
            "boxes_per_rack": self.boxes_per_rack,
            "layout": {k.name: int(v) for k, v in self.layout.items()},
            "bricks_per_box": self.bricks_per_box,
            "units_per_brick": self.units_per_brick,
            "unit_size": {k.name: self.unit_size[k] for k in KINDS},
            "link_capacity_gbps": self.link_capacity_gbps,
            "uplinks_per_box": self.uplinks_per_box,
            "uplinks_per_rack": self.uplinks_per_rack,
            "switch_ports": dict(self.switch_ports),
            "bandwidth_per_unit": dict(self.bandwidth_per_unit),
        }


@dataclass(frozen=True)
class BoxState:
    box_id: int
    rack_id: int
    kind: ResourceKind
    capacity_units: int
    available_units: int


def units_required(request, kind, config: DdcConfig) -> int:
    """Units of ``kind`` needed to cover the request, rounded up."""
    kind = ResourceKind.parse(kind)
    demand = request.demand(kind)
    if demand <= 0:
        return 0
    return int(math.ceil(demand / config.unit_size[kind] - 1e-12))


def demand_units(request, config: DdcConfig) -> np.ndarray:
    """``units_required`` for all three kinds at once, as an int64 array."""
    demand = np.array([request.cpu_cores, request.ram_gb, request.sto_gb], dtype=np.float64)
    sizes = np.array([config.unit_size[k] for k in KINDS], dtype=np.float64)
    return np.where(demand > 0, np.ceil(demand / sizes - 1e-12), 0).astype(np.int64)


class ClusterState:
    """Per-box unit accounting plus the per-rack max-available index.

    ``rack_max[r, k]`` is the id of the box of kind ``k`` in rack ``r`` with
    the most available units (lowest id on ties). It is refreshed for the
    touched (rack, kind) group after every allocate/release.
    """

    def __init__(self, config: DdcConfig):
        self.config = config
        R, per_rack = config.racks, config.boxes_per_rack
        n = R * per_rack
        kinds_in_rack = np.repeat(np.arange(3), [config.layout[k] for k in KINDS])
        self.box_kind = np.tile(kinds_in_rack, R).astype(np.int64)
        self.box_rack = np.repeat(np.arange(R), per_rack).astype(np.int64)
        self.rack_start = np.arange(R + 1, dtype=np.int64) * per_rack
        self.capacity = np.full(n, config.box_capacity_units, dtype=np.int64)
        self.avail = self.capacity.copy()

        offsets = np.concatenate([[0], np.cumsum([config.layout[k] for k in KINDS])])
        self.kind_range = np.empty((R, 3, 2), dtype=np.int64)
        for r in range(R):
            base = r * per_rack
            for k in range(3):
                self.kind_range[r, k] = base + offsets[k], base + offsets[k + 1]
        self.kind_boxes = tuple(np.flatnonzero(self.box_kind == k).astype(np.int64)
                                for k in range(3))
        self.unit_size = np.array([config.unit_size[k] for k in KINDS], dtype=np.float64)
        self.rack_max = np.empty((R, 3), dtype=np.int64)
        self.total_avail = np.zeros(3, dtype=np.int64)
        self.refresh()

    # -- bookkeeping -------------------------------------------------------

    def refresh(self):
        """Recompute ``rack_max`` and per-kind totals from scratch."""
        for r in range(self.config.racks):
            for k in range(3):
                start, stop = self.kind_range[r, k]
                self.rack_max[r, k] = kernels.rack_argmax(self.avail, start, stop)
        self.total_avail = np.bincount(self.box_kind, weights=self.avail,
                                       minlength=3).astype(np.int64)

    def _touch(self, box_id, delta):
        r, k = self.box_rack[box_id], self.box_kind[box_id]
        start, stop = self.kind_range[r, k]
        self.rack_max[r, k] = kernels.rack_argmax(self.avail, start, stop)
        self.total_avail[k] += delta

    def allocate(self, box_id: int, units: int):
        units = int(units)
        if units < 0:
            raise AllocationError(f"cannot allocate a negative amount ({units})")
        if units == 0:
            return
        if units > self.avail[box_id]:
            raise AllocationError(
                f"box {box_id} has {self.avail[box_id]} units available, {units} requested")
        self.avail[box_id] -= units
        self._touch(box_id, -units)

    def release(self, box_id: int, units: int):
        units = int(units)
        if units < 0:
            raise IntegrityError(f"cannot release a negative amount ({units})")
        if units == 0:
            return
        if self.avail[box_id] + units > self.capacity[box_id]:
            raise IntegrityError(
                f"release of {units} units would push box {box_id} above capacity "
                f"({self.avail[box_id]}/{self.capacity[box_id]})")
        self.avail[box_id] += units
        self._touch(box_id, units)

    def set_available(self, box_id: int, units: int):
        """Overwrite a box's availability (used to load mid-run fixtures)."""
        units = int(units)
        if not 0 <= units <= self.capacity[box_id]:
            raise ConfigError(
                f"box {box_id}: availability {units} outside [0, {self.capacity[box_id]}]")
        delta = units - int(self.avail[box_id])
        self.avail[box_id] = units
        self._touch(box_id, delta)

    # -- queries -----------------------------------------------------------

    @property
    def n_boxes(self) -> int:
        return self.avail.shape[0]

    @property
    def boxes(self) -> list[BoxState]:
        return [self.box(i) for i in range(self.n_boxes)]

    def box(self, box_id: int) -> BoxState:
        return BoxState(int(box_id), int(self.box_rack[box_id]),
                        ResourceKind(int(self.box_kind[box_id])),
                        int(self.capacity[box_id]), int(self.avail[box_id]))

    def kind_ordinal(self, box_id: int) -> int:
        """Index of ``box_id`` among boxes of its own kind (rack-major order)."""
        k = self.box_kind[box_id]
        return int(np.searchsorted(self.kind_boxes[k], box_id))

    def box_of_kind(self, kind, ordinal: int) -> int:
        return int(self.kind_boxes[ResourceKind.parse(kind)][ordinal])

    def available_quantity(self, kind) -> float:
        """Total physical quantity (cores or GB) still available for ``kind``."""
        k = ResourceKind.parse(kind)
        return float(self.total_avail[k] * self.unit_size[k])

    def utilization(self) -> np.ndarray:
        """Fraction of units in use per kind."""
        cap = np.bincount(self.box_kind, weights=self.capacity, minlength=3)
        return 1.0 - self.total_avail / cap

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.avail.tobytes())
        h.update(self.rack_max.tobytes())
        h.update(self.total_avail.tobytes())
        return h.hexdigest()

    def copy(self) -> "ClusterState":
        return copy.deepcopy(self)


def new_cluster(config: DdcConfig) -> ClusterState:
    if not isinstance(config, DdcConfig):
        raise ConfigError(f"expected DdcConfig, got {type(config).__name__}")
    return ClusterState(config)


def contention_ratios(state: ClusterState, request) -> dict:
    """Requested quantity over total available quantity, per kind.

    Quantities are physical (cores, GB), not units. An exhausted kind with a
    positive request has ratio ``inf``.
    """
    out = {}
    for kind in KINDS:
        want = float(request.demand(kind))
        have = state.available_quantity(kind)
        if want <= 0:
            out[kind] = 0.0
        elif have <= 0:
            out[kind] = math.inf
        else:
            out[kind] = want / have
    return out


def scarcest_kind(ratios: Mapping) -> ResourceKind:
    """Kind with the largest contention ratio; ties favour CPU, then RAM."""
    best = KINDS[0]
    for kind in KINDS[1:]:
        if ratios[kind] > ratios[best]:
            best = kind
    return best
