"""Discrete-event simulator for VM placement in optically switched disaggregated datacenters."""
from .config import Scenario, load_scenario, preset
from .energymodel import EnergyParams, EnergyReport
from .errors import (AllocationError, ConfigError, DdcError, IntegrityError, ReportError,
                     SchemaError, TraceParseError, ValidationError)
from .netfabric import Fabric, build_fabric
from .schedulers import ALGORITHMS, Placement, make_scheduler
from .simengine import Metrics, run
from .topology import ClusterState, DdcConfig, ResourceKind, new_cluster
from .workload import SyntheticSpec, VmRequest, gen_synthetic, load_trace

__version__ = "0.1.0"
