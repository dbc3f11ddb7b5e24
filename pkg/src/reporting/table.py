"""
Sweep tables: one CSV row per (sweep point, node).

Header (fixed):
    point,value,node_id,node_kind,status,mu,eta,alpha,eccentricity,area,peb_m

status is 'ok' or the name of the error that made the point unusable; the
metric columns of such rows are empty.
"""

from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from ..geometry.ellipse import area, eccentricity, fim_to_ellipse, peb
from ..joint.block_fim import assemble_block_fim
from ..joint.marginals import node_marginal_fim
from ..joint.network import Scenario
from ..scenario.sweep import sweep_axis
from ..utils.errors import BoundsError, ScenarioValidationError
from ..utils.logger import get_logger
from ..utils.parallel import run_ordered

logger = get_logger(__name__)

SWEEP_COLUMNS = [
    'point', 'value', 'node_id', 'node_kind', 'status',
    'mu', 'eta', 'alpha', 'eccentricity', 'area', 'peb_m',
]

_METRICS = SWEEP_COLUMNS[5:]


def _row(index: int, value: float, node_id: str, kind: str, status: str, metrics: Optional[Dict] = None) -> Dict:
    row = {'point': index, 'value': value, 'node_id': node_id, 'node_kind': kind, 'status': status}
    for name in _METRICS:
        row[name] = (metrics or {}).get(name)
    return row


def _node_kinds(scenario: Scenario) -> List[Tuple[str, str]]:
    requested = set(scenario.outputs)
    nodes = [(s.id, 'source') for s in scenario.unknown_sources]
    nodes += [(a.id, 'anchor') for a in scenario.uncertain_anchors]
    return [n for n in nodes if not requested or n[0] in requested]


def _metrics(scenario: Scenario, node_id: str, block) -> Dict[str, float]:
    info = fim_to_ellipse(node_marginal_fim(scenario, node_id, block))
    return {
        'mu': info.major,
        'eta': info.minor,
        'alpha': info.angle,
        'eccentricity': eccentricity(info),
        'area': area(info),
        'peb_m': peb(info),
    }


def evaluate_point(strict: bool, point: Tuple[int, float, Scenario]) -> List[Dict]:
    """
    Rows of one sweep point.

    Raises:
        BoundsError: Only in strict mode, for the first unusable point or node
    """
    index, value, scenario = point
    nodes = _node_kinds(scenario)

    errors = scenario.validate()
    if errors:
        if strict:
            raise ScenarioValidationError(errors)
        logger.warning(f"Sweep point {index} (value {value}) is invalid: {errors[0]}")
        return [_row(index, value, nid, kind, ScenarioValidationError.__name__) for nid, kind in nodes]

    try:
        block = assemble_block_fim(scenario)
    except BoundsError as e:
        if strict:
            raise
        logger.warning(f"Sweep point {index} (value {value}): {e}")
        return [_row(index, value, nid, kind, type(e).__name__) for nid, kind in nodes]

    rows = []
    for node_id, kind in nodes:
        try:
            rows.append(_row(index, value, node_id, kind, 'ok', _metrics(scenario, node_id, block)))
        except BoundsError as e:
            if strict:
                raise
            logger.warning(f"Sweep point {index} (value {value}), node '{node_id}': {e}")
            rows.append(_row(index, value, node_id, kind, type(e).__name__))
    return rows


def run_sweep(
    base: Scenario,
    axis: str,
    values: Sequence[float],
    strict: bool = False,
    workers: int = 1
) -> pd.DataFrame:
    """
    Evaluate every sweep point and collect the long-format table.

    Args:
        base: Scenario the sweep starts from
        axis: Parameter path, e.g. 'sources.s1.x' or 'delta'
        values: Swept values (may be empty)
        strict: Raise instead of recording unusable points
        workers: joblib workers

    Returns:
        DataFrame with SWEEP_COLUMNS, rows in point order

    Raises:
        UnknownParameterPathError: If the axis is not recognised
    """
    scenarios = sweep_axis(base, axis, values)
    points = list(zip(range(len(scenarios)), values, scenarios))
    results = run_ordered(partial(evaluate_point, strict), points, workers, desc=f"Sweep {axis}", unit="points")
    rows = [row for point_rows in results for row in point_rows]

    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    failed = int((table['status'] != 'ok').sum()) if len(table) else 0
    logger.info(f"Sweep over '{axis}': {len(points)} points, {len(table)} rows, {failed} unusable")
    return table


def write_table(table: pd.DataFrame, output_path: Path) -> None:
    """Write the sweep table as CSV with 17-significant-digit floats."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(output_path, index=False, float_format='%.17g', lineterminator='\n')
    logger.info(f"Sweep table saved: {output_path}")


def read_table(path: Path) -> pd.DataFrame:
    """Read a sweep table back; node ids stay strings."""
    return pd.read_csv(path, dtype={'node_id': str, 'node_kind': str, 'status': str})


def summarize_table(table: pd.DataFrame) -> Dict[str, Any]:
    """Per-node min/max PEB over usable points."""
    usable = table[table['status'] == 'ok']
    summary = {}
    for node_id, rows in usable.groupby('node_id', sort=False):
        summary[node_id] = {
            'points': int(len(rows)),
            'peb_min_m': float(rows['peb_m'].min()),
            'peb_max_m': float(rows['peb_m'].max()),
        }
    return summary
