"""JSON configuration: named presets, topology overrides, energy keys, fixtures.

A config file is a JSON object with optional keys::

    {
      "preset": "table1",                    # base to start from
      "topology": {"racks": 18, ...},        # any DdcConfig field
      "energy": {"alpha": 0.9, ...},         # EnergyParams.from_config keys
      "fixture": {"available": {"CPU": [0, 0, 64, 32], ...}}
    }

Fixture availabilities are physical quantities (cores, GB) listed per kind
in box-ordinal order and must be whole multiples of that kind's unit size.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .energymodel import EnergyParams
from .errors import ConfigError
from .topology import ClusterState, DdcConfig, ResourceKind

# Toy cluster: 2 racks, 2 boxes per kind per rack, 64 cores / 64 GB / 512 GB
# per box. One-core and one-GB units keep the walkthrough arithmetic exact.
TOY = DdcConfig(
    racks=2,
    bricks_per_box=4,
    units_per_brick=16,
    unit_size={ResourceKind.CPU: 1, ResourceKind.RAM: 1, ResourceKind.STO: 8},
)

# Mid-run availability from the toy walkthrough, indexed by per-kind box ordinal.
TABLE3_FIXTURE = {
    "available": {
        "CPU": [0, 0, 64, 32],
        "RAM": [0, 16, 32, 16],
        "STO": [0, 0, 256, 512],
    }
}

PRESETS = {
    "table1": (DdcConfig(), None),
    "toy": (TOY, None),
    "toy-table3": (TOY, TABLE3_FIXTURE),
}


@dataclass(frozen=True)
class Scenario:
    config: DdcConfig
    energy: EnergyParams = EnergyParams()
    fixture: dict | None = None

    def new_state(self) -> ClusterState:
        state = ClusterState(self.config)
        if self.fixture:
            apply_fixture(state, self.fixture)
        return state

    def to_dict(self) -> dict:
        out = {"topology": self.config.to_dict(), "energy": self.energy.to_config()}
        if self.fixture:
            out["fixture"] = self.fixture
        return out


def preset(name: str) -> Scenario:
    try:
        config, fixture = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    return Scenario(config, EnergyParams(), fixture)


def scenario_from_dict(raw: dict) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"preset", "topology", "energy", "fixture"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    base = preset(raw.get("preset", "table1"))
    config = base.config
    if "topology" in raw:
        fields = set(DdcConfig.__dataclass_fields__)
        bad = set(raw["topology"]) - fields
        if bad:
            raise ConfigError(f"unknown topology keys {sorted(bad)}")
        config = replace(config, **raw["topology"])
    energy = EnergyParams.from_config(raw.get("energy", {}))
    fixture = raw.get("fixture", base.fixture)
    scenario = Scenario(config, energy, fixture)
    if fixture:
        scenario.new_state()  # validate early
    return scenario


def load_scenario(path=None, preset_name=None) -> Scenario:
    """Scenario from a JSON file, a preset name, or the table1 default."""
    if path is not None and preset_name is not None:
        raise ConfigError("give either a config file or a preset, not both")
    if path is None:
        return preset(preset_name or "table1")
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return scenario_from_dict(raw)


def apply_fixture(state: ClusterState, fixture: dict):
    available = fixture.get("available")
    if not isinstance(available, dict):
        raise ConfigError("fixture needs an 'available' mapping of kind -> quantities")
    for key, quantities in available.items():
        kind = ResourceKind.parse(key)
        ids = state.kind_boxes[kind]
        if len(quantities) != len(ids):
            raise ConfigError(f"fixture lists {len(quantities)} {kind.name} boxes, "
                              f"cluster has {len(ids)}")
        size = state.config.unit_size[kind]
        for box_id, qty in zip(ids, quantities):
            units = qty / size
            if units != int(units):
                raise ConfigError(f"fixture {kind.name} quantity {qty} is not a multiple of "
                                  f"the {size} unit size")
            state.set_available(int(box_id), int(units))
    return state
