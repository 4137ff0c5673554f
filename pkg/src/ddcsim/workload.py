"""VM request streams: the seeded synthetic generator and normalized CSV traces.

Synthetic workloads draw from ``numpy.random.Generator(PCG64(seed))`` in a
fixed order (all interarrivals, then all CPU sizes, then all RAM sizes), so a
seed reproduces the same stream on any platform numpy supports.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import TraceParseError, ValidationError
from .topology import KINDS, DdcConfig, ResourceKind

TRACE_COLUMNS = ("vm_id", "cpu_cores", "ram_gb", "sto_gb", "arrival", "lifetime")
DEFAULT_STORAGE_GB = 128


@dataclass(frozen=True)
class VmRequest:
    vm_id: int
    cpu_cores: float
    ram_gb: float
    sto_gb: float
    arrival: float = 0.0
    lifetime: float = 1.0

    def demand(self, kind) -> float:
        kind = ResourceKind.parse(kind)
        if kind is ResourceKind.CPU:
            return self.cpu_cores
        if kind is ResourceKind.RAM:
            return self.ram_gb
        return self.sto_gb

    @property
    def departure(self) -> float:
        return self.arrival + self.lifetime

    def validate(self, config: DdcConfig | None = None):
        for kind in KINDS:
            if not self.demand(kind) >= 0:
                raise ValidationError(f"vm {self.vm_id}: negative {kind.name} demand")
        if not self.lifetime > 0:
            raise ValidationError(f"vm {self.vm_id}: lifetime must be positive")
        if config is not None:
            for kind in KINDS:
                if self.demand(kind) > config.box_capacity(kind):
                    raise ValidationError(
                        f"vm {self.vm_id}: {kind.name} demand {self.demand(kind)} exceeds one "
                        f"box's capacity {config.box_capacity(kind)}")


TraceRecord = VmRequest


@dataclass(frozen=True)
class SyntheticSpec:
    vm_count: int = 2500
    cpu_range: tuple = (1, 32)
    ram_range: tuple = (1, 32)
    sto_fixed: float = 128
    mean_interarrival: float = 10.0
    base_lifetime: float = 6300
    lifetime_step: float = 360
    step_every: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.vm_count < 0:
            raise ValueError("vm_count must be >= 0")
        for name in ("cpu_range", "ram_range"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must satisfy 1 <= low <= high, got {(lo, hi)}")
        if not (self.mean_interarrival > 0 and self.base_lifetime > 0 and self.step_every > 0
                and self.sto_fixed > 0 and self.lifetime_step >= 0):
            raise ValueError("synthetic spec parameters must be positive")


def lifetime_for(index: int, spec: SyntheticSpec) -> float:
    return spec.base_lifetime + spec.lifetime_step * (index // spec.step_every)


def gen_synthetic(spec: SyntheticSpec = SyntheticSpec()) -> list[VmRequest]:
    """Poisson arrivals, uniform integer CPU/RAM sizes, fixed storage, staircase lifetimes."""
    n = spec.vm_count
    rng = np.random.Generator(np.random.PCG64(spec.rng_seed))
    arrivals = np.cumsum(rng.exponential(spec.mean_interarrival, n))
    cpu = rng.integers(spec.cpu_range[0], spec.cpu_range[1], endpoint=True, size=n)
    ram = rng.integers(spec.ram_range[0], spec.ram_range[1], endpoint=True, size=n)
    return [
        VmRequest(i, int(cpu[i]), int(ram[i]), spec.sto_fixed, float(arrivals[i]),
                  lifetime_for(i, spec))
        for i in range(n)
    ]


def _number(text: str):
    text = text.strip()
    if not text:
        raise ValueError("empty value")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    if value.is_integer() and not any(c in text for c in ".eE"):
        return int(text)
    return value


def load_trace(path, config: DdcConfig | None = DdcConfig()) -> list[VmRequest]:
    """Parse a normalized trace CSV in file order.

    An empty ``sto_gb`` cell means 128 GB. Pass ``config=None`` to skip the
    per-box capacity check.
    """
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_COLUMNS:
            raise TraceParseError(path, 1, f"expected header {','.join(TRACE_COLUMNS)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(TRACE_COLUMNS):
                raise TraceParseError(path, line,
                                      f"expected {len(TRACE_COLUMNS)} fields, got {len(row)}")
            values = {}
            for name, cell in zip(TRACE_COLUMNS, row):
                if name == "sto_gb" and not cell.strip():
                    values[name] = DEFAULT_STORAGE_GB
                    continue
                try:
                    values[name] = _number(cell)
                except ValueError:
                    raise TraceParseError(path, line, f"bad {name} value {cell!r}") from None
            if not isinstance(values["vm_id"], int):
                raise TraceParseError(path, line, f"vm_id must be an integer, got {row[0]!r}")
            req = VmRequest(**values)
            req.validate(config)
            out.append(req)
    return out


def write_trace(requests: Iterable[VmRequest], path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in requests:
            writer.writerow([r.vm_id, repr(r.cpu_cores), repr(r.ram_gb), repr(r.sto_gb),
                             repr(r.arrival), repr(r.lifetime)])
    return path


def take_prefix(requests: Sequence[VmRequest], n: int) -> list[VmRequest]:
    if n < 0:
        raise ValueError("prefix length must be >= 0")
    return list(requests[:n])
