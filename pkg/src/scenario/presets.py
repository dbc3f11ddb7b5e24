"""Ready-made scenarios for the standard evaluation setups."""

import math
from typing import Callable, Dict, Optional

import numpy as np

from ..joint.network import Scenario, Source, UncertainAnchor
from ..propagation.rss_model import Anchor, PropagationModel
from .topology import build_anchors, circle_spec

DEFAULT_MODEL = PropagationModel(p0=0.0, gamma=3.5, d0=1.0, sigma=5.0)


def _model(model: Optional[PropagationModel]) -> PropagationModel:
    return model if model is not None else DEFAULT_MODEL


def triangle_aligned(model: Optional[PropagationModel] = None, d: float = 3.0) -> Scenario:
    """Three anchors at distance d with bearings 0, pi/3, pi (anchors 1 and 3 aligned)."""
    anchors = [
        Anchor(f"a{i + 1}", d * math.cos(phi), d * math.sin(phi))
        for i, phi in enumerate((0.0, math.pi / 3, math.pi))
    ]
    return Scenario(model=_model(model), anchors=anchors, sources=[Source("s1", 0.0, 0.0)])


def triangle_equilateral(model: Optional[PropagationModel] = None, d: float = 3.0) -> Scenario:
    """Three anchors equally spaced on a circle of radius d around the source."""
    return centered_circle(3, d, model=model)


def centered_circle(
    n: int,
    d: float,
    phi1: float = 0.0,
    model: Optional[PropagationModel] = None
) -> Scenario:
    """n anchors on a circle of radius d with the source at the centre."""
    spec = circle_spec(n, d, phi1)
    return Scenario(
        model=_model(model),
        anchors=build_anchors(spec),
        sources=[Source("s1", 0.0, 0.0)],
        topology=spec.to_dict(),
    )


def circle_sweep_base(n: int, d: float = 5.0, model: Optional[PropagationModel] = None) -> Scenario:
    """Circle with phi1 = 0 as the base of a source.x sweep over [0, 2d]."""
    return centered_circle(n, d, 0.0, model)


def partial_uncertainty(
    n: int = 64,
    d: float = 5.0,
    delta: float = 3.0,
    uncertain: int = 16,
    model: Optional[PropagationModel] = None
) -> Scenario:
    """Circle with phi1 = pi/n whose first `uncertain` anchors (first quadrant for n=64) are uncertain."""
    spec = circle_spec(n, d, math.pi / n, uncertain_first=uncertain, delta_m=delta)
    return Scenario(
        model=_model(model),
        anchors=build_anchors(spec),
        sources=[Source("s1", 0.0, 0.0)],
        topology=spec.to_dict(),
    )


def all_uncertain(
    n: int = 64,
    d: float = 5.0,
    delta: float = 3.0,
    model: Optional[PropagationModel] = None
) -> Scenario:
    """Every anchor uncertain with K = delta^2 I."""
    return partial_uncertainty(n, d, delta, uncertain=n, model=model)


def extra_known_sources(
    count: int = 8,
    ring_factor: float = 1.5,
    base: Optional[Scenario] = None
) -> Scenario:
    """Add `count` known-position sources on a ring of radius ring_factor * d."""
    base = base if base is not None else partial_uncertainty()
    radius = ring_factor * float(np.hypot(base.anchors[0].x, base.anchors[0].y))
    extras = [
        Source(f"k{i + 1}", radius * math.cos(2 * math.pi * i / count),
               radius * math.sin(2 * math.pi * i / count), known_position=True)
        for i in range(count)
    ]
    return Scenario(
        model=base.model,
        anchors=base.anchors,
        sources=list(base.sources) + extras,
        topology=base.topology,
    )


def single_uncertain_anchor(model: Optional[PropagationModel] = None) -> Scenario:
    """One uncertain anchor with K = [[4, 1.5], [1.5, 3]] observed by one known source."""
    anchor = UncertainAnchor("a1", 0.0, 0.0, np.array([[4.0, 1.5], [1.5, 3.0]]), 1)
    return Scenario(
        model=_model(model),
        anchors=[anchor],
        sources=[Source("s1", 3.0, 4.0, known_position=True)],
    )


def unknown_model_setup(model: Optional[PropagationModel] = None) -> Scenario:
    """n = 10 anchors on a circle of radius 10 with the source at (0, 5)."""
    spec = circle_spec(10, 10.0)
    return Scenario(
        model=_model(model),
        anchors=build_anchors(spec),
        sources=[Source("s1", 0.0, 5.0)],
        topology=spec.to_dict(),
    )


def asymptotic_circle(
    n: int = 10,
    d: float = 5.0,
    sample_count: int = 50,
    model: Optional[PropagationModel] = None
) -> Scenario:
    """Circle with the source off-centre at (0, 2) and t = 50, an asymptotic setup for coverage checks."""
    spec = circle_spec(n, d)
    return Scenario(
        model=_model(model),
        anchors=build_anchors(spec),
        sources=[Source("s1", 0.0, 2.0, sample_count=sample_count)],
        topology=spec.to_dict(),
    )


PRESETS: Dict[str, Callable[[], Scenario]] = {
    'triangle-aligned': triangle_aligned,
    'triangle-equilateral': triangle_equilateral,
    'circle-64': lambda: centered_circle(64, 5.0),
    'circle-sweep-base': lambda: circle_sweep_base(16),
    'partial-uncertainty': partial_uncertainty,
    'all-uncertain': all_uncertain,
    'extra-known-sources': extra_known_sources,
    'single-uncertain-anchor': single_uncertain_anchor,
    'unknown-model': unknown_model_setup,
    'asymptotic-circle': asymptotic_circle,
}
