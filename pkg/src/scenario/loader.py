"""
Parse, validate and serialize scenario documents.

Every field problem is collected with its path (e.g. "anchors[3].prior_cov")
and reported together in one ScenarioValidationError.

Usage:
    scenario = load_scenario(Path("scenarios/circle_center.yaml"))
    text = serialize_scenario(scenario)
"""

import math
import re
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from ..joint.network import AnyAnchor, Scenario, Source, UncertainAnchor
from ..propagation.rss_model import Anchor, PropagationModel
from ..utils.errors import ScenarioParseError, ScenarioValidationError
from ..utils.logger import get_logger
from ..utils.settings import DEFAULT_SETTINGS
from ..utils.yaml_io import dump_yaml
from .schema import ANCHOR_KINDS, SCHEMA_VERSION
from .topology import TopologyKind, TopologySpec, build_anchors, centers_tuple

logger = get_logger(__name__)

_ANGLE_PATTERN = re.compile(r'^\s*([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*(deg|rad)\s*$')

_TOP_LEVEL_KEYS = {'schema_version', 'model', 'topology', 'anchors', 'sources', 'analysis'}
_MODEL_KEYS = {'p0_dbm', 'gamma', 'd0_m', 'sigma_db'}
_ANCHOR_KEYS = {'id', 'x_m', 'y_m', 'kind', 'prior_cov', 'delta_m', 'prior_count'}
_SOURCE_KEYS = {'id', 'x_m', 'y_m', 'sample_count', 'known_position'}
_ANALYSIS_KEYS = {'confidence_k', 'outputs'}
_TOPOLOGY_KEYS = {
    'kind', 'n', 'd_m', 'phi1', 'rows', 'cols', 'spacing_m', 'bounds',
    'centers', 'cluster_size', 'radius_m', 'seed', 'uncertain',
}


class _FieldReader:
    """Typed field access that records errors instead of raising."""

    def __init__(self):
        self.errors: List[str] = []

    def error(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def mapping(self, value: Any, path: str, allowed: set) -> Optional[dict]:
        if not isinstance(value, dict):
            self.error(path, f"expected a mapping, got {type(value).__name__}")
            return None
        for key in value:
            if key not in allowed:
                self.error(f"{path}.{key}", "unknown field")
        return value

    def number(
        self,
        data: dict,
        key: str,
        path: str,
        default: Any = None,
        required: bool = True,
        positive: bool = False,
    ) -> Optional[float]:
        if key not in data:
            if default is not None or not required:
                return default
            self.error(f"{path}.{key}", "required field is missing")
            return None
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.error(f"{path}.{key}", f"expected a finite number, got {value!r}")
            return None
        if positive and value <= 0:
            self.error(f"{path}.{key}", f"must be positive, got {value!r}")
            return None
        return float(value)

    def numbers(self, values: list, path: str) -> Optional[List[float]]:
        """Finite numbers from a YAML list, one error per bad entry."""
        out = []
        for i, value in enumerate(values):
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                self.error(f"{path}[{i}]", f"expected a finite number, got {value!r}")
            else:
                out.append(float(value))
        return out if len(out) == len(values) else None

    def integer(self, data: dict, key: str, path: str, default: Optional[int] = None, minimum: int = 1) -> Optional[int]:
        if key not in data:
            if default is not None:
                return default
            self.error(f"{path}.{key}", "required field is missing")
            return None
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.error(f"{path}.{key}", f"expected an integer, got {value!r}")
            return None
        if value < minimum:
            self.error(f"{path}.{key}", f"must be >= {minimum}, got {value}")
            return None
        return value

    def angle(self, data: dict, key: str, path: str, default: float = 0.0) -> Optional[float]:
        """Radians, or a string with a 'deg'/'rad' unit suffix."""
        if key not in data:
            return default
        value = data[key]
        if isinstance(value, str):
            match = _ANGLE_PATTERN.match(value)
            if not match:
                self.error(f"{path}.{key}", f"expected radians or '<value> deg', got {value!r}")
                return None
            number = float(match.group(1))
            return math.radians(number) if match.group(2) == 'deg' else number
        return self.number(data, key, path)

    def string(self, data: dict, key: str, path: str) -> Optional[str]:
        if key not in data:
            self.error(f"{path}.{key}", "required field is missing")
            return None
        value = data[key]
        if not isinstance(value, (str, int)) or isinstance(value, bool):
            self.error(f"{path}.{key}", f"expected a string, got {value!r}")
            return None
        return str(value)


def _parse_model(reader: _FieldReader, raw: Any, defaults: Dict[str, Any]) -> Optional[PropagationModel]:
    data = {} if raw is None else reader.mapping(raw, "model", _MODEL_KEYS)
    if data is None:
        return None
    p0 = reader.number(data, 'p0_dbm', "model", default=float(defaults['p0_dbm']))
    gamma = reader.number(data, 'gamma', "model", default=float(defaults['gamma']), positive=True)
    d0 = reader.number(data, 'd0_m', "model", default=float(defaults['d0_m']), positive=True)
    sigma = reader.number(data, 'sigma_db', "model", default=float(defaults['sigma_db']), positive=True)
    if None in (p0, gamma, d0, sigma):
        return None
    return PropagationModel(p0=p0, gamma=gamma, d0=d0, sigma=sigma)


def _parse_topology(reader: _FieldReader, raw: Any) -> Optional[TopologySpec]:
    data = reader.mapping(raw, "topology", _TOPOLOGY_KEYS)
    if data is None:
        return None
    kind_name = data.get('kind')
    try:
        kind = TopologyKind(kind_name)
    except ValueError:
        reader.error("topology.kind", f"expected one of {[k.value for k in TopologyKind]}, got {kind_name!r}")
        return None

    before = len(reader.errors)
    fields: Dict[str, Any] = {'kind': kind}
    if kind in (TopologyKind.CIRCLE, TopologyKind.IRREGULAR):
        fields['n'] = reader.integer(data, 'n', "topology")
    if kind is TopologyKind.CIRCLE:
        fields['d_m'] = reader.number(data, 'd_m', "topology", positive=True)
        fields['phi1'] = reader.angle(data, 'phi1', "topology")
    elif kind is TopologyKind.GRID:
        fields['rows'] = reader.integer(data, 'rows', "topology")
        fields['cols'] = reader.integer(data, 'cols', "topology")
        fields['spacing_m'] = reader.number(data, 'spacing_m', "topology", positive=True)
    elif kind is TopologyKind.IRREGULAR:
        bounds = data.get('bounds')
        if not (isinstance(bounds, list) and len(bounds) == 4):
            reader.error("topology.bounds", "expected [xmin, ymin, xmax, ymax]")
        else:
            values = reader.numbers(bounds, "topology.bounds")
            if values is not None:
                fields['bounds'] = tuple(values)
        fields['seed'] = reader.integer(data, 'seed', "topology", default=0, minimum=0)
    else:
        centers = data.get('centers')
        if not (isinstance(centers, list) and centers and all(isinstance(c, list) and len(c) == 2 for c in centers)):
            reader.error("topology.centers", "expected a list of [x, y] pairs")
        else:
            pairs = [reader.numbers(c, f"topology.centers[{i}]") for i, c in enumerate(centers)]
            if all(p is not None for p in pairs):
                fields['centers'] = centers_tuple(pairs)
        fields['cluster_size'] = reader.integer(data, 'cluster_size', "topology")
        fields['radius_m'] = reader.number(data, 'radius_m', "topology", positive=True)
        fields['seed'] = reader.integer(data, 'seed', "topology", default=0, minimum=0)

    if 'uncertain' in data:
        unc = reader.mapping(data['uncertain'], "topology.uncertain", {'first', 'ids', 'delta_m', 'prior_count'})
        if unc is not None:
            fields['uncertain_first'] = reader.integer(unc, 'first', "topology.uncertain", default=0, minimum=0)
            ids = unc.get('ids', [])
            if not isinstance(ids, list):
                reader.error("topology.uncertain.ids", "expected a list of anchor ids")
            else:
                fields['uncertain_ids'] = tuple(str(i) for i in ids)
            fields['delta_m'] = reader.number(unc, 'delta_m', "topology.uncertain", positive=True)
            fields['prior_count'] = reader.integer(unc, 'prior_count', "topology.uncertain", default=1)

    if len(reader.errors) > before:
        return None
    try:
        return TopologySpec(**fields)
    except ValueError as e:
        reader.error("topology", str(e))
        return None


def _parse_prior_cov(reader: _FieldReader, data: dict, path: str) -> Optional[np.ndarray]:
    cov = None
    if 'prior_cov' in data:
        raw = data['prior_cov']
        try:
            cov = np.array(raw, dtype=float)
        except (TypeError, ValueError):
            cov = None
        if cov is None or cov.shape != (2, 2) or not np.all(np.isfinite(cov)):
            reader.error(f"{path}.prior_cov", "expected a 2x2 matrix [[k11, k12], [k21, k22]]")
            return None
        if cov[0, 1] != cov[1, 0]:
            reader.error(f"{path}.prior_cov", "must be symmetric")
            return None
        if np.linalg.eigvalsh(cov)[0] <= 0:
            reader.error(f"{path}.prior_cov", "must be positive definite")
            return None

    if 'delta_m' in data:
        delta = reader.number(data, 'delta_m', path, positive=True)
        if delta is None:
            return None
        sugar = np.eye(2) * delta * delta
        if cov is not None and not np.allclose(cov, sugar, rtol=1e-12, atol=0.0):
            reader.error(path, "prior_cov and delta_m are both given and disagree")
            return None
        cov = sugar if cov is None else cov

    if cov is None:
        reader.error(f"{path}.prior_cov", "uncertain anchor requires prior_cov or delta_m")
    return cov


def _parse_anchor(reader: _FieldReader, raw: Any, path: str) -> Optional[AnyAnchor]:
    data = reader.mapping(raw, path, _ANCHOR_KEYS)
    if data is None:
        return None
    before = len(reader.errors)
    anchor_id = reader.string(data, 'id', path)
    label = f"{path} ('{anchor_id}')" if anchor_id else path
    x = reader.number(data, 'x_m', path)
    y = reader.number(data, 'y_m', path)
    kind = data.get('kind', 'certain')
    if kind not in ANCHOR_KINDS:
        reader.error(f"{path}.kind", f"expected one of {list(ANCHOR_KINDS)}, got {kind!r}")
        return None

    if kind == 'certain':
        for key in ('prior_cov', 'delta_m', 'prior_count'):
            if key in data:
                reader.error(f"{label}.{key}", "only allowed for uncertain anchors")
        if len(reader.errors) > before:
            return None
        return Anchor(anchor_id, x, y)

    cov = _parse_prior_cov(reader, data, label)
    count = reader.integer(data, 'prior_count', path, default=1)
    if len(reader.errors) > before:
        return None
    return UncertainAnchor(anchor_id, x, y, cov, count)


def _parse_source(reader: _FieldReader, raw: Any, path: str) -> Optional[Source]:
    data = reader.mapping(raw, path, _SOURCE_KEYS)
    if data is None:
        return None
    before = len(reader.errors)
    source_id = reader.string(data, 'id', path)
    x = reader.number(data, 'x_m', path)
    y = reader.number(data, 'y_m', path)
    count = reader.integer(data, 'sample_count', path, default=1)
    known = data.get('known_position', False)
    if not isinstance(known, bool):
        reader.error(f"{path}.known_position", f"expected true or false, got {known!r}")
    if len(reader.errors) > before:
        return None
    return Source(source_id, x, y, count, known)


def parse_scenario(
    text: str,
    model_defaults: Optional[Dict[str, Any]] = None,
    default_k: float = 1.0
) -> Scenario:
    """
    Parse and validate a scenario document.

    Args:
        text: YAML document
        model_defaults: Propagation model used for fields missing from 'model'
        default_k: Confidence scale used when the document gives none

    Returns:
        Validated Scenario

    Raises:
        ScenarioParseError: If the document is not well-formed YAML
        ScenarioValidationError: With every field-level problem found
    """
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        problem = getattr(e, 'problem', None) or str(e)
        if mark is not None:
            raise ScenarioParseError(f"Malformed scenario document: {problem}", mark.line + 1, mark.column + 1) from e
        raise ScenarioParseError(f"Malformed scenario document: {problem}") from e

    reader = _FieldReader()
    root = reader.mapping(document, "document", _TOP_LEVEL_KEYS)
    if root is None:
        raise ScenarioValidationError(reader.errors)

    version = root.get('schema_version')
    if version != SCHEMA_VERSION:
        reader.error("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")

    model = _parse_model(reader, root.get('model'), model_defaults or DEFAULT_SETTINGS['model'])

    topology = _parse_topology(reader, root['topology']) if 'topology' in root else None

    anchors: List[AnyAnchor] = []
    if 'anchors' in root:
        raw_anchors = root['anchors']
        if not isinstance(raw_anchors, list):
            reader.error("anchors", "expected a list")
        else:
            for i, raw in enumerate(raw_anchors):
                anchor = _parse_anchor(reader, raw, f"anchors[{i}]")
                if anchor is not None:
                    anchors.append(anchor)
    elif topology is not None:
        try:
            anchors = build_anchors(topology)
        except ValueError as e:
            reader.error("topology.uncertain", str(e))
    elif 'topology' not in root:
        reader.error("anchors", "required field is missing (or give a topology)")

    sources: List[Source] = []
    raw_sources = root.get('sources')
    if not isinstance(raw_sources, list):
        reader.error("sources", "expected a list of sources")
    else:
        for j, raw in enumerate(raw_sources):
            src = _parse_source(reader, raw, f"sources[{j}]")
            if src is not None:
                sources.append(src)

    analysis = reader.mapping(root.get('analysis') or {}, "analysis", _ANALYSIS_KEYS) or {}
    confidence_k = reader.number(analysis, 'confidence_k', "analysis", default=float(default_k), positive=True)
    outputs = analysis.get('outputs') or []
    if not isinstance(outputs, list):
        reader.error("analysis.outputs", "expected a list of node ids")
        outputs = []

    if reader.errors or model is None:
        raise ScenarioValidationError(reader.errors)

    scenario = Scenario(
        model=model,
        anchors=anchors,
        sources=sources,
        confidence_k=confidence_k,
        outputs=[str(o) for o in outputs],
        topology=topology.to_dict() if topology is not None else None,
    )
    errors = scenario.validate()
    node_ids = set(scenario.node_ids())
    for i, node_id in enumerate(scenario.outputs):
        if node_id not in node_ids:
            errors.append(f"analysis.outputs[{i}]: '{node_id}' is not an unknown-position node")
    if errors:
        raise ScenarioValidationError(errors)

    logger.debug(
        f"Parsed scenario: n={scenario.n} anchors (u={scenario.u}), s={scenario.s} sources"
    )
    return scenario


def load_scenario(
    path: Path,
    model_defaults: Optional[Dict[str, Any]] = None,
    default_k: float = 1.0
) -> Scenario:
    """Read and parse a scenario file (UTF-8)."""
    path = Path(path)
    logger.info(f"Loading scenario from {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return parse_scenario(f.read(), model_defaults, default_k)


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Canonical, fully explicit document form of a scenario."""
    anchors = []
    for anchor in scenario.anchors:
        entry: Dict[str, Any] = {'id': anchor.id, 'x_m': float(anchor.x), 'y_m': float(anchor.y)}
        if isinstance(anchor, UncertainAnchor):
            entry['kind'] = 'uncertain'
            entry['prior_cov'] = [[float(v) for v in row] for row in anchor.prior_cov]
            entry['prior_count'] = int(anchor.prior_count)
        else:
            entry['kind'] = 'certain'
        anchors.append(entry)

    document: Dict[str, Any] = {
        'schema_version': SCHEMA_VERSION,
        'model': {k: float(v) for k, v in scenario.model.to_dict().items()},
    }
    if scenario.topology is not None:
        document['topology'] = scenario.topology
    document['anchors'] = anchors
    document['sources'] = [
        {
            'id': src.id,
            'x_m': float(src.x),
            'y_m': float(src.y),
            'sample_count': int(src.sample_count),
            'known_position': bool(src.known_position),
        }
        for src in scenario.sources
    ]
    document['analysis'] = {
        'confidence_k': float(scenario.confidence_k),
        'outputs': list(scenario.outputs),
    }
    return document


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical YAML text; parse_scenario(serialize_scenario(sc)) reproduces sc exactly."""
    return dump_yaml(scenario_to_dict(scenario))


def save_scenario(scenario: Scenario, path: Path) -> None:
    """Write the canonical document to a file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(serialize_scenario(scenario))
    logger.info(f"Saved scenario to {path}")
