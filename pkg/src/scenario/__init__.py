"""Scenario documents, topology generators, presets and sweeps."""

from .loader import load_scenario, parse_scenario, save_scenario, scenario_to_dict, serialize_scenario
from .presets import PRESETS
from .schema import SCHEMA_TEXT, SCHEMA_VERSION
from .sweep import parse_values, sweep_axis
from .topology import TopologyKind, TopologySpec, build_anchors, generate_topology

__all__ = [
    'PRESETS',
    'SCHEMA_TEXT',
    'SCHEMA_VERSION',
    'TopologyKind',
    'TopologySpec',
    'build_anchors',
    'generate_topology',
    'load_scenario',
    'parse_scenario',
    'parse_values',
    'save_scenario',
    'scenario_to_dict',
    'serialize_scenario',
    'sweep_axis',
]
