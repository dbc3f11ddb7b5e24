"""
Analysis reports: per-node FIM, Information/Error Ellipse, eccentricity,
area and PEB, with the gain/loss decomposition of each marginal FIM.

Reports are plain dictionaries in a fixed key order, written as YAML with
17-significant-digit floats, so the same scenario always produces the same
bytes. Wall-clock timing is added only on request.
"""

import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml

from .. import __version__
from ..geometry.ellipse import InfoMatrix2, area, eccentricity, error_ellipse, fim_to_ellipse, peb
from ..joint.block_fim import BlockFim, assemble_block_fim
from ..joint.marginals import anchor_marginal_fim, source_marginal_fim
from ..joint.network import Scenario
from ..propagation.nuisance import Nuisance, equivalent_fim_unknown_gamma, equivalent_fim_unknown_power
from ..scenario.loader import scenario_to_dict
from ..utils.errors import PreconditionViolationError, UnknownNodeIdError
from ..utils.logger import get_logger
from ..utils.yaml_io import dump_yaml

logger = get_logger(__name__)

TOOL_NAME = "rss-bounds"

_EQUIVALENTS = {
    Nuisance.POWER: equivalent_fim_unknown_power,
    Nuisance.GAMMA: equivalent_fim_unknown_gamma,
}


def bound_metrics(fim: InfoMatrix2) -> Dict[str, Any]:
    """
    Ellipse summary of one 2x2 FIM.

    Raises:
        NotPSDError: If the FIM is not PSD
        SingularFimError: If the node cannot be localized
    """
    info = fim_to_ellipse(fim)
    return {
        'fim': fim.to_dict(),
        'information_ellipse': info.to_dict(),
        'error_ellipse': error_ellipse(fim).to_dict(),
        'eccentricity': eccentricity(info),
        'area': area(info),
        'peb_m': peb(info),
    }


def node_entry(scenario: Scenario, node_id: str, block: Optional[BlockFim] = None) -> Dict[str, Any]:
    """Report entry for one unknown-position node."""
    if block is None:
        block = assemble_block_fim(scenario)
    if node_id in block.source_ids:
        kind = 'source'
        node = scenario.source(node_id)
        decomposition = source_marginal_fim(scenario, node_id, block)
    else:
        kind = 'anchor'
        node = scenario.anchor(node_id)
        decomposition = anchor_marginal_fim(scenario, node_id, block)

    entry: Dict[str, Any] = {'id': node_id, 'kind': kind, 'position_m': [float(node.x), float(node.y)]}
    entry.update(bound_metrics(decomposition.net))
    entry['decomposition'] = decomposition.to_dict()
    return entry


def nuisance_entry(scenario: Scenario, nuisance: Nuisance) -> Dict[str, Any]:
    """
    Equivalent source FIM with an unknown transmit power or path-loss exponent.

    Only defined for one unknown-position source and precisely known anchors.

    Raises:
        PreconditionViolationError: For any other scenario shape
    """
    unknown = scenario.unknown_sources
    if len(unknown) != 1 or scenario.u:
        raise PreconditionViolationError(
            f"Unknown-{nuisance.value} analysis needs exactly one unknown source and certain anchors "
            f"(got {len(unknown)} unknown sources, {scenario.u} uncertain anchors)"
        )
    source = unknown[0]
    equivalent, loss = _EQUIVALENTS[nuisance](scenario.anchors, source.position, scenario.model)
    equivalent = equivalent.scaled(source.sample_count)

    entry: Dict[str, Any] = {'nuisance': nuisance.value, 'source_id': source.id}
    entry.update(bound_metrics(equivalent))
    entry['loss'] = {'magnitude': loss.magnitude * source.sample_count, 'angle': loss.angle}
    return entry


def select_nodes(scenario: Scenario, node_ids: Sequence[str] = ()) -> List[str]:
    """Requested node ids (scenario.outputs when empty, then every unknown node)."""
    available = scenario.node_ids()
    requested = list(node_ids) or list(scenario.outputs) or available
    for node_id in requested:
        if node_id not in available:
            raise UnknownNodeIdError(f"'{node_id}' is not an unknown-position node of this scenario")
    return requested


def analyze_scenario(
    scenario: Scenario,
    node_ids: Sequence[str] = (),
    nuisance: Optional[Nuisance] = None,
    include_timing: bool = False
) -> Dict[str, Any]:
    """
    Build the AnalysisReport of a scenario.

    Args:
        scenario: Valid scenario
        node_ids: Restrict the report to these nodes
        nuisance: Add the equivalent FIM for an unknown model parameter
        include_timing: Record the wall-clock analysis time in the report

    Returns:
        Report dictionary

    Raises:
        EmptyParameterVectorError: If nothing is unknown
        SingularBlockError, SingularFimError: If a node cannot be localized
    """
    started = time.perf_counter()
    block = assemble_block_fim(scenario)
    nodes = [node_entry(scenario, node_id, block) for node_id in select_nodes(scenario, node_ids)]

    report: Dict[str, Any] = {
        'tool': TOOL_NAME,
        'version': __version__,
        'confidence_k': float(scenario.confidence_k),
        'scenario': scenario_to_dict(scenario),
        'nodes': nodes,
    }
    if nuisance is not None:
        report['nuisance'] = nuisance_entry(scenario, nuisance)

    elapsed = time.perf_counter() - started
    logger.info(f"Analyzed {len(nodes)} nodes in {elapsed:.3f} s")
    if include_timing:
        report['timing'] = {'analysis_seconds': elapsed}
    return report


def write_report(report: Dict[str, Any], output_path: Path) -> None:
    """Save a report as YAML."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(dump_yaml(report))
    logger.info(f"Report saved: {output_path}")


def is_report(document: Any) -> bool:
    return isinstance(document, dict) and document.get('tool') == TOOL_NAME and 'nodes' in document


def load_report(path: Path) -> Dict[str, Any]:
    """Read a report written by write_report."""
    with open(path, 'r', encoding='utf-8') as f:
        document = yaml.safe_load(f)
    if not is_report(document):
        raise ValueError(f"{path} is not an analysis report")
    return document
