"""
Parametric anchor layouts: circle, grid, irregular and clustered.

Anchors are named a1..an in generation order. Random layouts draw from a
numpy Generator seeded with TopologySpec.seed, so the same TopologySpec
always yields the same anchors.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..joint.network import AnyAnchor, UncertainAnchor
from ..propagation.rss_model import Anchor
from ..utils.logger import get_logger

logger = get_logger(__name__)


class TopologyKind(Enum):
    CIRCLE = "circle"
    GRID = "grid"
    IRREGULAR = "irregular"
    CLUSTERED = "clustered"


@dataclass(frozen=True)
class TopologySpec:
    """Generator parameters; only the fields of the chosen kind are used."""
    kind: TopologyKind
    # circle
    n: int = 0
    d_m: float = 0.0
    phi1: float = 0.0
    # grid
    rows: int = 0
    cols: int = 0
    spacing_m: float = 0.0
    # irregular
    bounds: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)  # xmin, ymin, xmax, ymax
    # clustered
    centers: Tuple[Tuple[float, float], ...] = ()
    cluster_size: int = 0
    radius_m: float = 0.0
    # irregular / clustered
    seed: int = 0
    # uncertainty applied after generation
    uncertain_first: int = 0
    uncertain_ids: Tuple[str, ...] = ()
    delta_m: Optional[float] = None
    prior_count: int = 1

    def __post_init__(self):
        if self.kind is TopologyKind.CIRCLE:
            if self.n < 1:
                raise ValueError(f"circle topology needs n >= 1, got {self.n}")
            if self.d_m <= 0:
                raise ValueError(f"circle topology needs d_m > 0, got {self.d_m}")
        elif self.kind is TopologyKind.GRID:
            if self.rows < 1 or self.cols < 1:
                raise ValueError("grid topology needs rows >= 1 and cols >= 1")
            if self.spacing_m <= 0:
                raise ValueError(f"grid topology needs spacing_m > 0, got {self.spacing_m}")
        elif self.kind is TopologyKind.IRREGULAR:
            if self.n < 1:
                raise ValueError(f"irregular topology needs n >= 1, got {self.n}")
            xmin, ymin, xmax, ymax = self.bounds
            if not (xmax > xmin and ymax > ymin):
                raise ValueError(f"irregular topology needs a non-empty bounding box, got {self.bounds}")
        elif self.kind is TopologyKind.CLUSTERED:
            if not self.centers or self.cluster_size < 1:
                raise ValueError("clustered topology needs centers and cluster_size >= 1")
            if self.radius_m <= 0:
                raise ValueError(f"clustered topology needs radius_m > 0, got {self.radius_m}")

        if self.uncertain_first < 0:
            raise ValueError("uncertain_first must be >= 0")
        if (self.uncertain_first or self.uncertain_ids) and not (self.delta_m and self.delta_m > 0):
            raise ValueError("uncertain anchors in a topology need delta_m > 0")
        if self.prior_count < 1:
            raise ValueError("prior_count must be >= 1")

    @property
    def anchor_count(self) -> int:
        if self.kind is TopologyKind.GRID:
            return self.rows * self.cols
        if self.kind is TopologyKind.CLUSTERED:
            return len(self.centers) * self.cluster_size
        return self.n

    def to_dict(self) -> dict:
        """Convert to the scenario document form (only fields of this kind)."""
        out: dict = {'kind': self.kind.value}
        if self.kind is TopologyKind.CIRCLE:
            out.update({'n': self.n, 'd_m': float(self.d_m), 'phi1': float(self.phi1)})
        elif self.kind is TopologyKind.GRID:
            out.update({'rows': self.rows, 'cols': self.cols, 'spacing_m': float(self.spacing_m)})
        elif self.kind is TopologyKind.IRREGULAR:
            out.update({'n': self.n, 'bounds': [float(v) for v in self.bounds], 'seed': self.seed})
        else:
            out.update({
                'centers': [[float(x), float(y)] for x, y in self.centers],
                'cluster_size': self.cluster_size,
                'radius_m': float(self.radius_m),
                'seed': self.seed,
            })
        if self.uncertain_first or self.uncertain_ids:
            uncertain: dict = {}
            if self.uncertain_first:
                uncertain['first'] = self.uncertain_first
            if self.uncertain_ids:
                uncertain['ids'] = list(self.uncertain_ids)
            uncertain['delta_m'] = float(self.delta_m)
            uncertain['prior_count'] = self.prior_count
            out['uncertain'] = uncertain
        return out


def _ids(count: int) -> List[str]:
    return [f"a{i + 1}" for i in range(count)]


def _circle(spec: TopologySpec) -> np.ndarray:
    # phi_i = phi1 + (i - 1) 2 pi / n
    phis = spec.phi1 + np.arange(spec.n) * 2.0 * math.pi / spec.n
    return spec.d_m * np.column_stack([np.cos(phis), np.sin(phis)])


def _grid(spec: TopologySpec) -> np.ndarray:
    x0 = -0.5 * (spec.cols - 1) * spec.spacing_m
    y0 = -0.5 * (spec.rows - 1) * spec.spacing_m
    return np.array([
        [x0 + c * spec.spacing_m, y0 + r * spec.spacing_m]
        for r in range(spec.rows)
        for c in range(spec.cols)
    ])


def _irregular(spec: TopologySpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    xmin, ymin, xmax, ymax = spec.bounds
    return np.column_stack([rng.uniform(xmin, xmax, spec.n), rng.uniform(ymin, ymax, spec.n)])


def _clustered(spec: TopologySpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    points = []
    for cx, cy in spec.centers:
        # uniform in the disc of radius radius_m
        radii = spec.radius_m * np.sqrt(rng.uniform(0.0, 1.0, spec.cluster_size))
        angles = rng.uniform(0.0, 2.0 * math.pi, spec.cluster_size)
        points.append(np.column_stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)]))
    return np.vstack(points)


_GENERATORS = {
    TopologyKind.CIRCLE: _circle,
    TopologyKind.GRID: _grid,
    TopologyKind.IRREGULAR: _irregular,
    TopologyKind.CLUSTERED: _clustered,
}


def generate_topology(spec: TopologySpec) -> List[Anchor]:
    """
    Generate certain anchors for a layout.

    Args:
        spec: Topology parameters

    Returns:
        Anchors a1..an
    """
    positions = _GENERATORS[spec.kind](spec)
    anchors = [Anchor(aid, float(x), float(y)) for aid, (x, y) in zip(_ids(len(positions)), positions)]
    logger.debug(f"Generated {len(anchors)} anchors for {spec.kind.value} topology")
    return anchors


def build_anchors(spec: TopologySpec) -> List[AnyAnchor]:
    """Generate anchors and mark the selected ones uncertain with K = delta^2 I."""
    anchors = generate_topology(spec)
    chosen = set(spec.uncertain_ids) | {a.id for a in anchors[:spec.uncertain_first]}
    unknown_ids = set(spec.uncertain_ids) - {a.id for a in anchors}
    if unknown_ids:
        raise ValueError(f"uncertain ids not produced by the topology: {sorted(unknown_ids)}")
    return [
        UncertainAnchor.isotropic(a.id, a.x, a.y, spec.delta_m, spec.prior_count) if a.id in chosen else a
        for a in anchors
    ]


def circle_spec(n: int, d_m: float, phi1: float = 0.0, **uncertainty) -> TopologySpec:
    """Shorthand for a circle TopologySpec."""
    return TopologySpec(kind=TopologyKind.CIRCLE, n=n, d_m=d_m, phi1=phi1, **uncertainty)


def centers_tuple(centers: Sequence[Sequence[float]]) -> Tuple[Tuple[float, float], ...]:
    return tuple((float(c[0]), float(c[1])) for c in centers)
