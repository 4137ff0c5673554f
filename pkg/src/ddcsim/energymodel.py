"""Optical energy per VM: MRR switch cells along each circuit plus transceivers."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, ReportError
from .netfabric import DEFAULT_LAT_SW, Fabric


@dataclass(frozen=True)
class EnergyParams:
    p_swcell: float = 13.75e-3      # W per cell while switching
    p_trimcell: float = 22.67e-3    # W per cell while holding state
    alpha: float = 0.9              # cell-sharing factor, 0.5 (all shared) .. 1 (none)
    e_tx: float = 22.5e-12          # J/bit per transceiver module
    lat_sw: dict = field(default_factory=lambda: dict(DEFAULT_LAT_SW))
    time_unit_seconds: float = 1.0

    def __post_init__(self):
        if not 0.5 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0.5, 1], got {self.alpha}")
        for name in ("p_swcell", "p_trimcell", "e_tx", "time_unit_seconds"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        merged = dict(DEFAULT_LAT_SW, **self.lat_sw)
        if any(v <= 0 for v in merged.values()):
            raise ConfigError("switch latencies must be positive")
        object.__setattr__(self, "lat_sw", merged)

    @classmethod
    def from_config(cls, raw: dict) -> "EnergyParams":
        """Build from config-file keys in display units (mW, pJ/bit, us)."""
        known = {"p_swcell_mw", "p_trimcell_mw", "alpha", "e_tx_pj_per_bit", "lat_sw_us",
                 "time_unit_seconds"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown energy keys {sorted(unknown)}")
        kw = {}
        if "p_swcell_mw" in raw:
            kw["p_swcell"] = raw["p_swcell_mw"] * 1e-3
        if "p_trimcell_mw" in raw:
            kw["p_trimcell"] = raw["p_trimcell_mw"] * 1e-3
        if "alpha" in raw:
            kw["alpha"] = raw["alpha"]
        if "e_tx_pj_per_bit" in raw:
            kw["e_tx"] = raw["e_tx_pj_per_bit"] * 1e-12
        if "lat_sw_us" in raw:
            kw["lat_sw"] = {k: v * 1e-6 for k, v in raw["lat_sw_us"].items()}
        if "time_unit_seconds" in raw:
            kw["time_unit_seconds"] = raw["time_unit_seconds"]
        return cls(**kw)

    def to_config(self) -> dict:
        return {
            "p_swcell_mw": self.p_swcell * 1e3,
            "p_trimcell_mw": self.p_trimcell * 1e3,
            "alpha": self.alpha,
            "e_tx_pj_per_bit": self.e_tx * 1e12,
            "lat_sw_us": {k: v * 1e6 for k, v in self.lat_sw.items()},
            "time_unit_seconds": self.time_unit_seconds,
        }


@dataclass
class EnergyReport:
    switch_energy_j: float = 0.0
    transceiver_energy_j: float = 0.0
    average_power_w: float = 0.0

    @property
    def total_j(self) -> float:
        return self.switch_energy_j + self.transceiver_energy_j

    def __iadd__(self, other: "EnergyReport"):
        self.switch_energy_j += other.switch_energy_j
        self.transceiver_energy_j += other.transceiver_energy_j
        return self

    def to_dict(self) -> dict:
        return {
            "switch_energy_j": self.switch_energy_j,
            "transceiver_energy_j": self.transceiver_energy_j,
            "total_j": self.total_j,
            "average_power_w": self.average_power_w,
        }


def switch_energy(n: int, lat_sw: float, lifetime_s: float,
                  params: EnergyParams = EnergyParams()) -> float:
    """Energy of one circuit through a switch whose paths cross ``n`` cells.

    Half the cells reconfigure once (switching power for ``lat_sw``); all
    ``n`` then hold state for the VM lifetime, scaled by ``alpha``.
    """
    if n < 1:
        raise ValueError("a switch path crosses at least one cell")
    if lifetime_s < 0:
        raise ValueError("lifetime must be non-negative")
    return (n / 2 * params.p_swcell * lat_sw) + (params.alpha * n * params.p_trimcell * lifetime_s)


def vm_network_energy(placement, lifetime_s: float, fabric: Fabric,
                      params: EnergyParams = EnergyParams()) -> EnergyReport:
    """Switch and transceiver energy of a placement's two flows.

    Flows with zero bandwidth need no circuit and cost nothing. Every link
    segment ends in a transceiver module at both ends.
    """
    report = EnergyReport()
    for path in placement.paths.values():
        if path.reserved_gbps <= 0:
            continue
        for cls in path.switches:
            spec = fabric.switch_specs[cls]
            report.switch_energy_j += switch_energy(spec.path_cell_count, params.lat_sw[cls],
                                                    lifetime_s, params)
        bits = path.reserved_gbps * 1e9 * lifetime_s
        report.transceiver_energy_j += len(path.links) * 2 * params.e_tx * bits
    return report


def aggregate_power(total_energy_j: float, span_s: float) -> float:
    """Time-averaged power over the simulated span."""
    if span_s <= 0:
        if total_energy_j == 0:
            return 0.0
        raise ReportError("cannot average energy over a zero-length span")
    return total_energy_j / span_s
