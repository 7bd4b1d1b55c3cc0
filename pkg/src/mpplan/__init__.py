"""Multi-period optical network planning over C+L bands.

Routing, configuration and spectrum assignment with bandwidth-variable
transceivers and 4-line comb sources, gated by an end-of-life GN/ISRS
QoT estimate, driven through proactive and incremental planning flows.
"""

from .kernels import BACKEND
from .netgraph import Topology, load_topology, nobel_germany, parse_topology
from .planner import ALL_FLOWS, Flow, GrowthModel, PlanConfig, run_flow
from .qot import QotParams, estimate_snr
from .rcsa import Mode, k_shortest_paths, place_demand, select_configuration
from .xcvr import XcvrConfig, default_catalog, generate_catalog, preselect

__version__ = "0.1.0"

__all__ = [
    "ALL_FLOWS", "BACKEND", "Flow", "GrowthModel", "Mode", "PlanConfig", "QotParams", "Topology",
    "XcvrConfig", "default_catalog", "estimate_snr", "generate_catalog", "k_shortest_paths",
    "load_topology", "nobel_germany", "parse_topology", "place_demand", "preselect", "run_flow",
    "select_configuration",
]
