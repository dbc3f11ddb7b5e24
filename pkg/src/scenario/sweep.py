"""
One-parameter scenario sweeps.

Axis paths:
    source.x, source.y               first source
    sources.<id>.x, sources.<id>.y   a named source
    sample_count                     t_j of every source
    delta                            K_k = delta^2 I for every uncertain anchor
    n                                anchor count, regenerated from the topology
    model.gamma, model.sigma         propagation model
"""

import dataclasses
import re
from typing import Callable, Dict, List, Sequence

import numpy as np

from ..joint.network import Scenario, UncertainAnchor
from ..utils.errors import UnknownParameterPathError
from ..utils.logger import get_logger
from .topology import TopologyKind, TopologySpec, build_anchors, centers_tuple

logger = get_logger(__name__)

_SOURCE_PATH = re.compile(r'^sources\.([^.]+)\.(x|y)$')


def parse_values(text: str) -> List[float]:
    """
    Parse a value list: "0.5,1,2,3" or an inclusive range "start:stop:step".

    Range points are start + i * step, so "0:10:0.5" gives 21 values.
    """
    text = text.strip()
    if not text:
        return []
    if ':' in text:
        parts = [float(p) for p in text.split(':')]
        if len(parts) != 3 or parts[2] == 0:
            raise ValueError(f"Range must be start:stop:step with step != 0, got '{text}'")
        start, stop, step = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(max(count, 0))]
    return [float(p) for p in text.split(',') if p.strip()]


def topology_from_dict(data: dict) -> TopologySpec:
    """Inverse of TopologySpec.to_dict."""
    fields = {k: v for k, v in data.items() if k not in ('kind', 'uncertain', 'bounds', 'centers')}
    fields['kind'] = TopologyKind(data['kind'])
    if 'bounds' in data:
        fields['bounds'] = tuple(float(v) for v in data['bounds'])
    if 'centers' in data:
        fields['centers'] = centers_tuple(data['centers'])
    uncertain = data.get('uncertain') or {}
    if uncertain:
        fields['uncertain_first'] = uncertain.get('first', 0)
        fields['uncertain_ids'] = tuple(uncertain.get('ids', ()))
        fields['delta_m'] = uncertain['delta_m']
        fields['prior_count'] = uncertain.get('prior_count', 1)
    return TopologySpec(**fields)


def _move_source(index: int, coord: str) -> Callable[[Scenario, float], Scenario]:
    def apply(base: Scenario, value: float) -> Scenario:
        sources = list(base.sources)
        sources[index] = dataclasses.replace(sources[index], **{coord: float(value)})
        return dataclasses.replace(base, sources=sources)
    return apply


def _set_sample_count(base: Scenario, value: float) -> Scenario:
    if value != int(value) or value < 1:
        raise ValueError(f"sample_count must be a positive integer, got {value}")
    sources = [dataclasses.replace(s, sample_count=int(value)) for s in base.sources]
    return dataclasses.replace(base, sources=sources)


def _set_delta(base: Scenario, value: float) -> Scenario:
    anchors = [
        UncertainAnchor.isotropic(a.id, a.x, a.y, float(value), a.prior_count)
        if isinstance(a, UncertainAnchor) else a
        for a in base.anchors
    ]
    topology = base.topology
    if topology is not None and topology.get('uncertain'):
        topology = {**topology, 'uncertain': {**topology['uncertain'], 'delta_m': float(value)}}
    return dataclasses.replace(base, anchors=anchors, topology=topology)


def _set_anchor_count(base: Scenario, value: float) -> Scenario:
    if base.topology is None:
        raise UnknownParameterPathError("Axis 'n' needs a scenario with a topology section")
    spec = topology_from_dict(base.topology)
    if spec.kind not in (TopologyKind.CIRCLE, TopologyKind.IRREGULAR):
        raise UnknownParameterPathError(f"Axis 'n' is not defined for {spec.kind.value} topologies")
    spec = dataclasses.replace(spec, n=int(value))
    return dataclasses.replace(base, anchors=build_anchors(spec), topology=spec.to_dict())


def _set_model(field_name: str) -> Callable[[Scenario, float], Scenario]:
    def apply(base: Scenario, value: float) -> Scenario:
        return dataclasses.replace(base, model=dataclasses.replace(base.model, **{field_name: float(value)}))
    return apply


def resolve_axis(base: Scenario, axis: str) -> Callable[[Scenario, float], Scenario]:
    """
    Map an axis path to a function (scenario, value) -> scenario.

    Raises:
        UnknownParameterPathError: If the path does not name a sweepable field
    """
    simple: Dict[str, Callable[[Scenario, float], Scenario]] = {
        'sample_count': _set_sample_count,
        'delta': _set_delta,
        'n': _set_anchor_count,
        'model.gamma': _set_model('gamma'),
        'model.sigma': _set_model('sigma'),
    }
    if axis in simple:
        if axis == 'delta' and not base.uncertain_anchors:
            raise UnknownParameterPathError("Axis 'delta' needs at least one uncertain anchor")
        return simple[axis]

    if axis in ('source.x', 'source.y'):
        if not base.sources:
            raise UnknownParameterPathError(f"Axis '{axis}' needs a source")
        return _move_source(0, axis[-1])

    match = _SOURCE_PATH.match(axis)
    if match:
        ids = [s.id for s in base.sources]
        if match.group(1) not in ids:
            raise UnknownParameterPathError(f"Axis '{axis}' names unknown source '{match.group(1)}'")
        return _move_source(ids.index(match.group(1)), match.group(2))

    raise UnknownParameterPathError(
        f"Unknown sweep axis '{axis}'; expected source.x, source.y, sources.<id>.x, "
        f"sources.<id>.y, sample_count, delta, n, model.gamma or model.sigma"
    )


def sweep_axis(base: Scenario, axis: str, values: Sequence[float]) -> List[Scenario]:
    """
    One scenario per value, otherwise identical to base, in value order.

    Scenarios are not validated here; a point whose geometry is invalid
    (e.g. the source on top of an anchor) is reported by the caller.

    Raises:
        UnknownParameterPathError: If the axis is not recognised
    """
    apply = resolve_axis(base, axis)
    scenarios = [apply(base, value) for value in values]
    logger.debug(f"Sweep over '{axis}' produced {len(scenarios)} scenarios")
    return scenarios
