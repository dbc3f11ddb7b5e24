"""
Independent reference computations the closed forms are checked against.

full_inverse_marginal  node FIM from inverting the whole block FIM
eigh_ellipse           (mu, eta, alpha) from a numeric eigendecomposition
gradient_check         analytic score against central finite differences
random_scenario        randomized joint scenarios for property checks
"""

import math
from typing import Callable, Dict, Optional

import numpy as np

from ..geometry.ellipse import EllipseParams, InfoMatrix2
from ..joint.block_fim import BlockFim, assemble_block_fim
from ..joint.marginals import node_marginal_fim
from ..joint.network import Scenario, Source, UncertainAnchor
from ..propagation.rss_model import Anchor, PropagationModel
from .likelihood import log_likelihood_and_score, truth_vector
from .simulator import simulate


def full_inverse_marginal(scenario: Scenario, node_id: str, block: Optional[BlockFim] = None) -> InfoMatrix2:
    """Node FIM as the inverse of its 2x2 block of F^{-1}."""
    if block is None:
        block = assemble_block_fim(scenario)
    k = block.offset(node_id)
    crlb = np.linalg.inv(block.matrix)[k:k + 2, k:k + 2]
    info = np.linalg.inv(crlb)
    return InfoMatrix2.from_array(0.5 * (info + info.T))


def eigh_ellipse(matrix: np.ndarray) -> EllipseParams:
    """Ellipse parameters of a symmetric 2x2 matrix via numpy.linalg.eigh."""
    eigenvalues, vectors = np.linalg.eigh(np.asarray(matrix, dtype=float))
    major = vectors[:, 1]
    return EllipseParams(float(eigenvalues[1]), float(max(eigenvalues[0], 0.0)), math.atan2(major[1], major[0]))


def relative_matrix_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """||actual - expected||_F / ||expected||_F."""
    expected = np.asarray(expected, dtype=float)
    return float(np.linalg.norm(np.asarray(actual) - expected) / np.linalg.norm(expected))


def schur_oracle_error(scenario: Scenario) -> Dict[str, float]:
    """Relative error of every node's Schur marginal against full_inverse_marginal."""
    block = assemble_block_fim(scenario)
    errors = {}
    for node_id in block.source_ids + block.anchor_ids:
        schur = node_marginal_fim(scenario, node_id, block).as_array()
        errors[node_id] = relative_matrix_error(schur, full_inverse_marginal(scenario, node_id, block).as_array())
    return errors


def central_difference_gradient(
    func: Callable[[np.ndarray], float],
    theta: np.ndarray,
    relative_step: float = 1e-5
) -> np.ndarray:
    """Central differences with step relative_step * max(1, |theta_i|) per coordinate."""
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        h = relative_step * max(1.0, abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (func(up) - func(down)) / (2.0 * h)
    return grad


def gradient_check(
    scenario: Scenario,
    points: int = 100,
    seed: int = 0,
    spread_m: float = 0.5,
    relative_step: float = 1e-5
) -> float:
    """
    Largest relative component error of the analytic score against central
    differences, over `points` random parameter vectors around the truth.

    Each point gets its own observation draw; the error at a point is
    max_i |g_i - g~_i| / max_i |g~_i|.

    Returns:
        Maximum error over all points
    """
    truth = truth_vector(scenario)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(points):
        obs = simulate(scenario, rng=rng)
        theta = truth + spread_m * rng.standard_normal(truth.shape)
        analytic = log_likelihood_and_score(scenario, obs, theta)[1]
        numeric = central_difference_gradient(
            lambda t: log_likelihood_and_score(scenario, obs, t)[0], theta, relative_step
        )
        scale = max(float(np.max(np.abs(numeric))), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return worst


def _random_prior_cov(rng: np.random.Generator, scale_m: float) -> np.ndarray:
    root = rng.normal(scale=scale_m, size=(2, 2))
    return root @ root.T + 0.1 * scale_m ** 2 * np.eye(2)


def random_scenario(
    rng: np.random.Generator,
    max_sources: int = 4,
    max_uncertain: int = 8,
    max_anchors: int = 32,
    model: Optional[PropagationModel] = None,
    extent_m: float = 20.0,
    known_sources: int = 0
) -> Scenario:
    """
    Random joint scenario with anchors and sources uniform in a square.

    Every source-anchor distance is at least 2 d0; positions are redrawn until
    that holds. At least three anchors are drawn and all anchors may be uncertain.
    """
    model = model or PropagationModel()
    n = int(rng.integers(3, max_anchors + 1))
    u = int(rng.integers(0, min(max_uncertain, n) + 1))
    s = int(rng.integers(1, max_sources + 1))
    half = 0.5 * extent_m

    while True:
        anchor_xy = rng.uniform(-half, half, size=(n, 2))
        source_xy = rng.uniform(-half, half, size=(s + known_sources, 2))
        gaps = np.linalg.norm(anchor_xy[None, :, :] - source_xy[:, None, :], axis=2)
        if gaps.min() >= 2.0 * model.d0:
            break

    anchors = []
    for k, (x, y) in enumerate(anchor_xy):
        if k < u:
            anchors.append(UncertainAnchor(
                id=f"a{k + 1}", x=float(x), y=float(y),
                prior_cov=_random_prior_cov(rng, float(rng.uniform(0.5, 3.0))),
                prior_count=int(rng.integers(1, 4)),
            ))
        else:
            anchors.append(Anchor(id=f"a{k + 1}", x=float(x), y=float(y)))

    sources = [
        Source(id=f"s{j + 1}", x=float(x), y=float(y), sample_count=int(rng.integers(1, 6)))
        for j, (x, y) in enumerate(source_xy[:s])
    ]
    sources += [
        Source(id=f"k{j + 1}", x=float(x), y=float(y), sample_count=int(rng.integers(1, 6)), known_position=True)
        for j, (x, y) in enumerate(source_xy[s:])
    ]
    return Scenario(model=model, anchors=tuple(anchors), sources=tuple(sources))
