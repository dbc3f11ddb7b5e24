"""
Log-likelihood of the joint model and its analytic gradient (the score).

Parameter vector layout matches the block FIM: [x, y] of every unknown-position
source, then [x, y] of every uncertain anchor. Constant terms are dropped.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..joint.network import Scenario
from .simulator import ObservationDraw

LN10 = math.log(10.0)

# Distances are floored here while the optimizer explores; the model itself needs d >= d0
_MIN_DISTANCE = 1e-9


@dataclass(frozen=True)
class ParameterLayout:
    """Ids in parameter order and the 2-row offset of each."""
    source_ids: Tuple[str, ...]
    anchor_ids: Tuple[str, ...]

    @classmethod
    def of(cls, scenario: Scenario) -> "ParameterLayout":
        return cls(
            tuple(s.id for s in scenario.unknown_sources),
            tuple(a.id for a in scenario.uncertain_anchors),
        )

    @property
    def size(self) -> int:
        return 2 * (len(self.source_ids) + len(self.anchor_ids))

    def offset(self, node_id: str) -> int:
        ids = self.source_ids + self.anchor_ids
        return 2 * ids.index(node_id)


def truth_vector(scenario: Scenario) -> np.ndarray:
    """True parameter vector of a scenario."""
    parts = [s.position for s in scenario.unknown_sources]
    parts += [a.position for a in scenario.uncertain_anchors]
    return np.concatenate(parts) if parts else np.zeros(0)


def _positions(scenario: Scenario, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Source positions (s, 2) and anchor positions (n, 2) implied by theta."""
    layout_sources = [s.id for s in scenario.unknown_sources]
    layout_anchors = [a.id for a in scenario.uncertain_anchors]
    base = 2 * len(layout_sources)

    sources = np.array([s.position for s in scenario.sources], dtype=float)
    for i, src in enumerate(scenario.sources):
        if not src.known_position:
            j = layout_sources.index(src.id)
            sources[i] = theta[2 * j:2 * j + 2]

    anchors = np.array([a.position for a in scenario.anchors], dtype=float)
    for i, anchor in enumerate(scenario.anchors):
        if anchor.id in layout_anchors:
            k = base + 2 * layout_anchors.index(anchor.id)
            anchors[i] = theta[k:k + 2]
    return sources, anchors


def log_likelihood_and_score(
    scenario: Scenario,
    obs: ObservationDraw,
    theta: np.ndarray
) -> Tuple[float, np.ndarray]:
    """
    Log-likelihood of theta and its gradient.

        ln f = -sum_j sum_k sum_i (p_k^{ij} - delta_k^j)^2 / (2 sigma^2)
               - sum_k sum_z (r~_z - r_k)^T K_k^{-1} (r~_z - r_k) / 2

    d delta / d r_TX = (10 gamma / ln 10) (r_k - r_TX) / d^2 and
    d delta / d r_k is its negative.

    Args:
        scenario: Scenario
        obs: Observations
        theta: Parameter vector

    Returns:
        (log-likelihood, score vector)
    """
    model = scenario.model
    theta = np.asarray(theta, dtype=float)
    sources, anchors = _positions(scenario, theta)
    layout = ParameterLayout.of(scenario)
    anchor_slot = {a.id: i for i, a in enumerate(scenario.anchors)}
    grad = np.zeros_like(theta)
    slope = 10.0 * model.gamma / LN10
    value = 0.0

    anchor_grad = np.zeros_like(anchors)
    for i, src in enumerate(scenario.sources):
        diff = anchors - sources[i]
        dist_sq = np.maximum(np.sum(diff * diff, axis=1), _MIN_DISTANCE ** 2)
        delta = model.p0 - 5.0 * model.gamma * np.log10(dist_sq / model.d0 ** 2)
        residual = obs.rss[i] - delta[:, None]
        value -= float(np.sum(residual * residual)) / (2.0 * model.sigma ** 2)

        # d lnf / d delta_k summed over samples, times d delta_k / d r_TX
        weight = residual.sum(axis=1) / model.sigma ** 2 * slope / dist_sq
        contribution = weight[:, None] * diff
        if not src.known_position:
            j = layout.offset(src.id)
            grad[j:j + 2] += contribution.sum(axis=0)
        anchor_grad -= contribution

    for anchor in scenario.uncertain_anchors:
        k = layout.offset(anchor.id)
        position = theta[k:k + 2]
        info = np.linalg.inv(anchor.prior_cov)
        offsets = obs.prior_estimates[anchor.id] - position
        value -= 0.5 * float(np.einsum('zi,ij,zj->', offsets, info, offsets))
        grad[k:k + 2] += anchor_grad[anchor_slot[anchor.id]] + info @ offsets.sum(axis=0)

    return value, grad


def negative_log_likelihood(scenario: Scenario, obs: ObservationDraw, theta: np.ndarray) -> float:
    return -log_likelihood_and_score(scenario, obs, theta)[0]


def score(scenario: Scenario, obs: ObservationDraw, theta: np.ndarray) -> np.ndarray:
    """Gradient of the log-likelihood at theta."""
    return log_likelihood_and_score(scenario, obs, theta)[1]


def node_slices(scenario: Scenario) -> Dict[str, slice]:
    """Node id -> slice of its coordinates in the parameter vector."""
    layout = ParameterLayout.of(scenario)
    ids: List[str] = list(layout.source_ids + layout.anchor_ids)
    return {node_id: slice(2 * i, 2 * i + 2) for i, node_id in enumerate(ids)}
