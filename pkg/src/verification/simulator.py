"""
Draw observations from the joint statistical model.

RSS samples p_k^{ij} ~ N(delta_k^j, sigma^2) independently for every source j,
anchor k and sample i; prior estimates of uncertain anchor k are a_k
independent draws from N(r_k, K_k).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..joint.network import Scenario
from ..propagation.rss_model import mean_rss, source_geometry


@dataclass(eq=False)
class ObservationDraw:
    """One realization of every observation in a scenario."""
    rss: List[np.ndarray]                       # per source (in scenario order): (n, t_j) dBm
    prior_estimates: Dict[str, np.ndarray]      # per uncertain anchor: (a_k, 2) m
    rng_seed: Optional[int] = None
    means: List[np.ndarray] = field(default_factory=list, repr=False)


def mean_observations(scenario: Scenario) -> List[np.ndarray]:
    """Mean RSS delta_k^j per source, shape (n,) each."""
    means = []
    for src in scenario.sources:
        geometry = source_geometry(scenario.anchors, src.position, scenario.model, src.id)
        means.append(np.asarray(mean_rss(scenario.model, geometry.distances), dtype=float))
    return means


def simulate(
    scenario: Scenario,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    means: Optional[List[np.ndarray]] = None
) -> ObservationDraw:
    """
    Simulate RSS samples and prior anchor estimates.

    Args:
        scenario: Valid scenario
        seed: Seed for a fresh generator (ignored when rng is given)
        rng: Generator to draw from, e.g. a per-trial stream
        means: Precomputed mean_observations(scenario)

    Returns:
        ObservationDraw

    Raises:
        BelowReferenceDistanceError: If a source-anchor distance is below d0
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if means is None:
        means = mean_observations(scenario)

    sigma = scenario.model.sigma
    rss = [
        mean[:, None] + sigma * rng.standard_normal((len(mean), src.sample_count))
        for src, mean in zip(scenario.sources, means)
    ]

    priors = {}
    for anchor in scenario.uncertain_anchors:
        chol = np.linalg.cholesky(anchor.prior_cov)
        draws = rng.standard_normal((anchor.prior_count, 2))
        priors[anchor.id] = anchor.position + draws @ chol.T

    return ObservationDraw(rss=rss, prior_estimates=priors, rng_seed=seed, means=means)
