"""Markdown summary of an analysis report."""

from pathlib import Path
from typing import Any, Dict

from ..utils.logger import get_logger
from ..utils.yaml_io import format_float

logger = get_logger(__name__)


def _g(value: float) -> str:
    return '%.6g' % value


def render_markdown(report: Dict[str, Any]) -> str:
    """
    Human-readable companion to a report; values are rounded to 6 digits,
    the YAML report stays the reference.
    """
    scenario = report['scenario']
    model = scenario['model']
    anchors = scenario['anchors']
    uncertain = sum(1 for a in anchors if a['kind'] == 'uncertain')

    content = f"""# Localization bounds report

## Scenario

- Anchors: {len(anchors)} ({uncertain} uncertain)
- Sources: {len(scenario['sources'])}
- Model: p0 = {_g(model['p0_dbm'])} dBm, gamma = {_g(model['gamma'])}, d0 = {_g(model['d0_m'])} m, sigma = {_g(model['sigma_db'])} dB
- Confidence scale k = {format_float(report['confidence_k'])}

## Nodes

| Node | Kind | mu | eta | alpha (rad) | Eccentricity | Area | PEB (m) |
|---|---|---|---|---|---|---|---|
"""
    for node in report['nodes']:
        ie = node['information_ellipse']
        content += (
            f"| {node['id']} | {node['kind']} | {_g(ie['major'])} | {_g(ie['minor'])} | {_g(ie['angle'])} "
            f"| {_g(node['eccentricity'])} | {_g(node['area'])} | {_g(node['peb_m'])} |\n"
        )

    nuisance = report.get('nuisance')
    if nuisance:
        ie = nuisance['information_ellipse']
        content += f"""
## Unknown {nuisance['nuisance']}

Source `{nuisance['source_id']}`: equivalent IE ({_g(ie['major'])}, {_g(ie['minor'])}, {_g(ie['angle'])}),
loss magnitude {_g(nuisance['loss']['magnitude'])} at angle {_g(nuisance['loss']['angle'])} rad,
PEB {_g(nuisance['peb_m'])} m.
"""

    content += f"\n---\n\nGenerated by {report['tool']} {report['version']}\n"
    return content


def write_markdown(report: Dict[str, Any], output_path: Path) -> None:
    """Save the markdown summary."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(render_markdown(report))
    logger.info(f"Markdown summary saved: {output_path}")
