"""Discrete-event loop driving one scheduler over one workload."""
from __future__ import annotations

import csv
import heapq
import io
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .config import Scenario
from .energymodel import EnergyParams, EnergyReport, aggregate_power, vm_network_energy
from .errors import IntegrityError
from .netfabric import INTRA_RACK, build_fabric, utilization
from .schedulers import make_scheduler, release_placement
from .topology import KINDS, DdcConfig

RTT_INTRA_NS = 110.0
RTT_INTER_NS = 330.0

DEPARTURE, ARRIVAL = 0, 1  # departures first at equal timestamps

METRICS_SCHEMA = "ddcsim.metrics/1"
LOG_COLUMNS = ("vm_id", "algorithm", "cpu_box", "ram_box", "sto_box", "span",
               "cpu_ram_path", "ram_sto_path", "dropped")


@dataclass
class Metrics:
    algorithm: str
    total_requests: int = 0
    placed_count: int = 0
    dropped_count: int = 0
    inter_rack_count: int = 0
    avg_cpu_ram_rtt_ns: float | None = None
    utilization: dict = field(default_factory=lambda: {k.name: 0.0 for k in KINDS})
    network_utilization: dict = field(default_factory=lambda: {"intra": 0.0, "inter": 0.0})
    energy: EnergyReport = field(default_factory=EnergyReport)
    span: float = 0.0
    span_seconds: float = 0.0
    scheduler_seconds: float | None = 0.0
    workload: str = ""

    def to_dict(self) -> dict:
        return {
            "schema": METRICS_SCHEMA,
            "algorithm": self.algorithm,
            "workload": self.workload,
            "total_requests": self.total_requests,
            "placed_count": self.placed_count,
            "dropped_count": self.dropped_count,
            "inter_rack_count": self.inter_rack_count,
            "avg_cpu_ram_rtt_ns": self.avg_cpu_ram_rtt_ns,
            "utilization": dict(self.utilization),
            "network_utilization": dict(self.network_utilization),
            "energy": self.energy.to_dict(),
            "span": self.span,
            "span_seconds": self.span_seconds,
            "scheduler_seconds": self.scheduler_seconds,
        }


@dataclass
class LogEntry:
    vm_id: int
    algorithm: str
    boxes: tuple | None
    span: str
    paths: tuple = ()
    dropped: bool = False

    def row(self) -> list:
        boxes = self.boxes if self.boxes is not None else ("", "", "")
        paths = ["-".join(map(str, p)) for p in self.paths] or ["", ""]
        return [self.vm_id, self.algorithm, *boxes, self.span, *paths, int(self.dropped)]


@dataclass
class RunResult:
    metrics: Metrics
    log: list
    placements: dict

    def log_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for entry in self.log:
            writer.writerow(entry.row())
        return buf.getvalue()


def latency_metric(placements) -> float | None:
    """Mean CPU-RAM round trip over placed VMs; ``None`` when nothing was placed."""
    placements = list(placements)
    if not placements:
        return None
    inter = sum(1 for p in placements if p.span != INTRA_RACK)
    return (RTT_INTRA_NS * (len(placements) - inter) + RTT_INTER_NS * inter) / len(placements)


def utilization_metric(times, values, t_end) -> np.ndarray:
    """Time-weighted mean of piecewise-constant samples over [times[0], t_end]."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    return kernels.time_weighted_mean(times, values, float(t_end))


def _as_scenario(config) -> Scenario:
    if isinstance(config, Scenario):
        return config
    if isinstance(config, DdcConfig):
        return Scenario(config)
    raise TypeError(f"expected Scenario or DdcConfig, got {type(config).__name__}")


def check_conservation(state, fabric, live, baseline=None):
    """Raise IntegrityError unless the books balance against the live placements.

    ``baseline`` is per-box usage present before the run (fixtures).
    """
    used = state.capacity - state.avail
    expect = np.zeros(state.n_boxes, dtype=np.int64)
    if baseline is not None:
        expect += baseline
    for p in live.values():
        for k in KINDS:
            expect[p.box_of[k]] += p.units[k]
    if not np.array_equal(used, expect):
        raise IntegrityError("compute units in use do not match live placements")
    links = np.zeros_like(fabric.allocated)
    for p in live.values():
        for path in p.paths.values():
            np.add.at(links, np.asarray(path.links), path.reserved_gbps)
    if not np.allclose(links, fabric.allocated, atol=1e-6):
        raise IntegrityError("link allocations do not match live reservations")
    fresh = state.rack_max.copy()
    state.refresh()
    if not np.array_equal(state.avail[fresh], state.avail[state.rack_max]):
        raise IntegrityError("rack_max index is stale")


def _state_dump(state, fabric, t, live):
    return {
        "time": t,
        "avail": state.avail.tolist(),
        "link_allocated": fabric.allocated.tolist(),
        "live_vms": sorted(live),
    }


def run(config, algorithm_name: str, workload: Sequence, *, check_invariants: bool = False,
        workload_name: str = "") -> RunResult:
    """Replay ``workload`` through one scheduler and collect metrics.

    ``config`` is a ``Scenario`` (topology, energy parameters, optional
    availability fixture) or a bare ``DdcConfig``.
    """
    scenario = _as_scenario(config)
    cfg, params = scenario.config, scenario.energy
    scheduler = make_scheduler(algorithm_name)
    for req in workload:
        req.validate(cfg)

    state = scenario.new_state()
    baseline = state.capacity - state.avail
    fabric = build_fabric(cfg, params.lat_sw)
    initial = (state.digest(), fabric.digest())
    kernels.warmup()

    events = []
    for seq, req in enumerate(workload):
        heapq.heappush(events, (float(req.arrival), ARRIVAL, seq, req))
    seq = len(events)

    metrics = Metrics(algorithm=scheduler.name, total_requests=len(workload),
                      workload=workload_name)
    live, placements, log = {}, {}, []
    times, samples = [], []
    sched_time = 0.0
    energy = EnergyReport()
    t = t0 = events[0][0] if events else 0.0

    while events:
        t, kind, _, payload = heapq.heappop(events)
        if kind == ARRIVAL:
            req = payload
            tic = time.perf_counter()
            placement = scheduler.place(state, fabric, req)
            sched_time += time.perf_counter() - tic
            if placement is None:
                metrics.dropped_count += 1
                log.append(LogEntry(req.vm_id, scheduler.name, None, "", (), True))
            else:
                metrics.placed_count += 1
                metrics.inter_rack_count += placement.inter_rack
                live[req.vm_id] = placement
                placements[req.vm_id] = placement
                energy += vm_network_energy(placement, req.lifetime * params.time_unit_seconds,
                                            fabric, params)
                log.append(LogEntry(req.vm_id, scheduler.name, placement.boxes, placement.span,
                                    (placement.paths["cpu_ram"].links,
                                     placement.paths["ram_sto"].links)))
                heapq.heappush(events, (t + float(req.lifetime), DEPARTURE, seq, req.vm_id))
                seq += 1
        else:
            release_placement(state, fabric, live.pop(payload))

        if np.any(fabric.allocated > fabric.capacity + 1e-9):
            raise IntegrityError(f"link over capacity at t={t}",
                                 _state_dump(state, fabric, t, live))
        if check_invariants:
            try:
                check_conservation(state, fabric, live, baseline)
            except IntegrityError as exc:
                raise IntegrityError(str(exc), _state_dump(state, fabric, t, live)) from None
        times.append(t)
        samples.append((*state.utilization(), *utilization(fabric)))

    if check_invariants and (state.digest(), fabric.digest()) != initial:
        raise IntegrityError("cluster or fabric not restored after the last departure")

    span = t - t0
    if times:
        means = utilization_metric(times, samples, t)
        metrics.utilization = {k.name: float(means[k]) for k in KINDS}
        metrics.network_utilization = {"intra": float(means[3]), "inter": float(means[4])}
    metrics.span = float(span)
    metrics.span_seconds = float(span * params.time_unit_seconds)
    energy.average_power_w = aggregate_power(energy.total_j, metrics.span_seconds)
    metrics.energy = energy
    metrics.avg_cpu_ram_rtt_ns = latency_metric(placements.values())
    metrics.scheduler_seconds = sched_time
    return RunResult(metrics, log, placements)
