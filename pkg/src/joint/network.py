"""
Network description for the joint source/anchor problem.

Anchors are either certain (set V) or uncertain (set U, known only through
a_k prior estimates with covariance K_k). Sources transmit one at a time; a
source with known_position contributes observations but owns no unknowns.
Positions of uncertain anchors and sources are the true values at which the
bounds are evaluated.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..geometry.ellipse import InfoMatrix2
from ..propagation.rss_model import Anchor, PropagationModel
from ..utils.errors import UnknownNodeIdError
from ..utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class UncertainAnchor:
    """Anchor known through a_k prior estimates distributed N(r_k, K_k)."""
    id: str
    x: float
    y: float
    prior_cov: np.ndarray
    prior_count: int = 1

    def __post_init__(self):
        cov = np.asarray(self.prior_cov, dtype=float)
        if cov.shape != (2, 2):
            raise ValueError(f"Anchor '{self.id}': prior_cov must be 2x2, got shape {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=0.0):
            raise ValueError(f"Anchor '{self.id}': prior_cov must be symmetric")
        if np.linalg.eigvalsh(cov)[0] <= 0:
            raise ValueError(f"Anchor '{self.id}': prior_cov must be positive definite")
        if int(self.prior_count) != self.prior_count or self.prior_count < 1:
            raise ValueError(f"Anchor '{self.id}': prior_count must be a positive integer")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Anchor '{self.id}' has non-finite coordinates")
        object.__setattr__(self, 'prior_cov', cov)

    @classmethod
    def isotropic(cls, id: str, x: float, y: float, delta: float, prior_count: int = 1) -> "UncertainAnchor":
        """Anchor with K_k = delta^2 I."""
        return cls(id, x, y, np.eye(2) * delta * delta, prior_count)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def prior_information(self) -> InfoMatrix2:
        """a_k K_k^{-1}."""
        return InfoMatrix2.from_array(self.prior_count * np.linalg.inv(self.prior_cov))

    @property
    def isotropic_delta(self) -> Optional[float]:
        """Delta when K_k = Delta^2 I, otherwise None."""
        k11, k12, k22 = self.prior_cov[0, 0], self.prior_cov[0, 1], self.prior_cov[1, 1]
        if abs(k12) > 1e-12 * k11 or abs(k11 - k22) > 1e-12 * k11:
            return None
        return math.sqrt(k11)


@dataclass(frozen=True)
class Source:
    """Transmitter collecting sample_count RSS samples at every anchor."""
    id: str
    x: float
    y: float
    sample_count: int = 1
    known_position: bool = False

    def __post_init__(self):
        if int(self.sample_count) != self.sample_count or self.sample_count < 1:
            raise ValueError(f"Source '{self.id}': sample_count must be a positive integer")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Source '{self.id}' has non-finite coordinates")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


AnyAnchor = Union[Anchor, UncertainAnchor]


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Full network: anchors in document order, sources, propagation model.

    topology optionally records the generator spec the anchors came from so
    sweeps over the anchor count can regenerate them.
    """
    model: PropagationModel
    anchors: Tuple[AnyAnchor, ...]
    sources: Tuple[Source, ...]
    confidence_k: float = 1.0
    outputs: Tuple[str, ...] = ()
    topology: Optional[dict] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, 'anchors', tuple(self.anchors))
        object.__setattr__(self, 'sources', tuple(self.sources))
        object.__setattr__(self, 'outputs', tuple(self.outputs))

    @property
    def certain_anchors(self) -> List[Anchor]:
        return [a for a in self.anchors if not isinstance(a, UncertainAnchor)]

    @property
    def uncertain_anchors(self) -> List[UncertainAnchor]:
        return [a for a in self.anchors if isinstance(a, UncertainAnchor)]

    @property
    def unknown_sources(self) -> List[Source]:
        return [s for s in self.sources if not s.known_position]

    @property
    def known_sources(self) -> List[Source]:
        return [s for s in self.sources if s.known_position]

    @property
    def n(self) -> int:
        return len(self.anchors)

    @property
    def u(self) -> int:
        return len(self.uncertain_anchors)

    @property
    def s(self) -> int:
        return len(self.sources)

    def source(self, source_id: str) -> Source:
        for src in self.sources:
            if src.id == source_id:
                return src
        raise UnknownNodeIdError(f"Unknown source id '{source_id}'")

    def anchor(self, anchor_id: str) -> AnyAnchor:
        for anchor in self.anchors:
            if anchor.id == anchor_id:
                return anchor
        raise UnknownNodeIdError(f"Unknown anchor id '{anchor_id}'")

    def node_ids(self) -> List[str]:
        """Ids of every node with an unknown position: sources first, then uncertain anchors."""
        return [s.id for s in self.unknown_sources] + [a.id for a in self.uncertain_anchors]

    def validate(self) -> List[str]:
        """
        Check cross-field invariants.

        Returns:
            List of field-path error messages (empty when valid)
        """
        errors: List[str] = []
        seen: Dict[str, str] = {}
        for i, anchor in enumerate(self.anchors):
            if anchor.id in seen:
                errors.append(f"anchors[{i}].id: duplicate id '{anchor.id}' (also used by {seen[anchor.id]})")
            else:
                seen[anchor.id] = f"anchors[{i}]"
        for j, src in enumerate(self.sources):
            if src.id in seen:
                errors.append(f"sources[{j}].id: duplicate id '{src.id}' (also used by {seen[src.id]})")
            else:
                seen[src.id] = f"sources[{j}]"

        for j, src in enumerate(self.sources):
            for anchor in self.anchors:
                distance = math.hypot(anchor.x - src.x, anchor.y - src.y)
                if distance < self.model.d0:
                    errors.append(
                        f"sources[{j}]: distance {distance:.6g} m between source '{src.id}' and "
                        f"anchor '{anchor.id}' is below d0={self.model.d0:.6g} m"
                    )

        if not self.confidence_k > 0:
            errors.append(f"analysis.confidence_k: must be positive, got {self.confidence_k}")
        if not self.sources:
            errors.append("sources: at least one source is required")
        if not self.anchors:
            errors.append("anchors: at least one anchor is required")
        elif self.n < 3:
            logger.warning(f"Only {self.n} anchors; localization is degenerate below 3")
        return errors


def isotropic_scenario_anchors(
    anchors: Sequence[Anchor],
    uncertain_ids: Sequence[str],
    delta: float,
    prior_count: int = 1
) -> List[AnyAnchor]:
    """Turn the listed anchors into uncertain anchors with K = delta^2 I."""
    chosen = set(uncertain_ids)
    return [
        UncertainAnchor.isotropic(a.id, a.x, a.y, delta, prior_count) if a.id in chosen else a
        for a in anchors
    ]
