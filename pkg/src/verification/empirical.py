"""
Monte-Carlo FIM estimates: the average outer product of the score at truth.

Trials are split into fixed chunks; each trial draws from its own stream
derived from (seed, trial index) and chunk sums are added in chunk order, so
the result is bit-identical for any worker count.
"""

from dataclasses import dataclass, replace
from functools import partial
from typing import Sequence, Tuple

import numpy as np

from ..joint.block_fim import assemble_block_fim
from ..joint.network import Scenario
from ..propagation.nuisance import fim_unknown_gamma, fim_unknown_power, fim_unknown_power_gamma
from ..propagation.rss_model import Anchor, PropagationModel, mean_rss, source_fim
from ..utils.logger import get_logger
from ..utils.parallel import chunk_ranges, run_ordered, trial_rng
from .likelihood import score, truth_vector
from .oracles import central_difference_gradient
from .simulator import mean_observations, simulate

logger = get_logger(__name__)

SOURCE_PARAMETERS = ('x', 'y', 'p_tx', 'gamma')
SUPPORTED_PARAMETER_SETS = (
    ('x', 'y'), ('x', 'y', 'p_tx'), ('x', 'y', 'gamma'), SOURCE_PARAMETERS,
)


@dataclass(eq=False)
class EmpiricalFimResult:
    matrix: np.ndarray
    analytic: np.ndarray
    trials: int
    seed: int

    @property
    def relative_frobenius(self) -> float:
        """||empirical - analytic||_F / ||analytic||_F."""
        return float(np.linalg.norm(self.matrix - self.analytic) / np.linalg.norm(self.analytic))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def _score_chunk(scenario: Scenario, seed: int, bounds: Tuple[int, int]) -> np.ndarray:
    theta = truth_vector(scenario)
    means = mean_observations(scenario)
    total = np.zeros((theta.size, theta.size))
    for index in range(*bounds):
        obs = simulate(scenario, rng=trial_rng(seed, index), means=means)
        s = score(scenario, obs, theta)
        total += np.outer(s, s)
    return total


def empirical_fim(
    scenario: Scenario,
    trials: int,
    seed: int,
    chunk_size: int = 1000,
    workers: int = 1
) -> EmpiricalFimResult:
    """
    Estimate the joint FIM by averaging score outer products over simulated draws.

    Args:
        scenario: Scenario with at least one unknown parameter
        trials: Number of simulated observation sets
        seed: Run seed
        chunk_size: Trials per work item
        workers: joblib workers

    Returns:
        EmpiricalFimResult with the analytic block FIM for comparison
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    analytic = assemble_block_fim(scenario).matrix
    chunks = chunk_ranges(trials, chunk_size)
    sums = run_ordered(partial(_score_chunk, scenario, seed), chunks, workers, desc="Score trials", unit="chunks")
    matrix = np.sum(np.stack(sums), axis=0) / trials

    result = EmpiricalFimResult(matrix=matrix, analytic=analytic, trials=trials, seed=seed)
    logger.info(f"Empirical FIM over {trials} trials: relative Frobenius distance {result.relative_frobenius:.4f}")
    return result


def _analytic_source_fim(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel,
    parameters: Tuple[str, ...]
) -> np.ndarray:
    if parameters == ('x', 'y'):
        return source_fim(anchors, source, model).as_array()
    if parameters == ('x', 'y', 'p_tx'):
        return fim_unknown_power(anchors, source, model).matrix
    if parameters == ('x', 'y', 'gamma'):
        return fim_unknown_gamma(anchors, source, model).matrix
    if parameters == SOURCE_PARAMETERS:
        return fim_unknown_power_gamma(anchors, source, model)
    raise ValueError(f"parameters must be one of {SUPPORTED_PARAMETER_SETS}, got {parameters}")


def _rss_log_likelihood(positions: np.ndarray, rss: np.ndarray, model: PropagationModel, theta: np.ndarray) -> float:
    """Gaussian log-likelihood of one RSS vector at theta = [x, y, p_tx, gamma]."""
    distances = np.hypot(positions[:, 0] - theta[0], positions[:, 1] - theta[1])
    trial_model = replace(model, p0=float(theta[2]), gamma=float(theta[3]))
    residual = rss - mean_rss(trial_model, distances)
    return float(-0.5 * np.sum(residual * residual) / model.sigma ** 2)


def _source_score_chunk(
    positions: np.ndarray,
    truth: np.ndarray,
    model: PropagationModel,
    indices: Tuple[int, ...],
    seed: int,
    bounds: Tuple[int, int]
) -> np.ndarray:
    distances = np.hypot(positions[:, 0] - truth[0], positions[:, 1] - truth[1])
    means = mean_rss(model, distances)
    total = np.zeros((len(indices), len(indices)))
    for index in range(*bounds):
        rss = means + model.sigma * trial_rng(seed, index).standard_normal(len(distances))
        s = central_difference_gradient(
            lambda theta: _rss_log_likelihood(positions, rss, model, theta), truth
        )[list(indices)]
        total += np.outer(s, s)
    return total


def empirical_source_fim(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel,
    parameters: Sequence[str] = SOURCE_PARAMETERS,
    trials: int = 10000,
    seed: int = 0,
    chunk_size: int = 1000,
    workers: int = 1
) -> EmpiricalFimResult:
    """
    Monte-Carlo FIM of one source with certain anchors, optionally with unknown
    transmit power and/or path-loss exponent.

    RSS vectors are drawn from the log-distance model and the score is the
    central-difference gradient of the Gaussian log-likelihood in
    [x, y, p_tx, gamma], so the estimate is independent of the closed-form
    Jacobian. The analytic side is source_fim, fim_unknown_power,
    fim_unknown_gamma or fim_unknown_power_gamma.

    Args:
        parameters: One of ('x', 'y'), ('x', 'y', 'p_tx'), ('x', 'y', 'gamma'),
            ('x', 'y', 'p_tx', 'gamma')

    Raises:
        ValueError: On an unsupported parameter set or trials < 1
    """
    parameters = tuple(parameters)
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    analytic = _analytic_source_fim(anchors, source, model, parameters)

    positions = np.array([a.position for a in anchors])
    truth = np.array([float(source[0]), float(source[1]), model.p0, model.gamma])
    indices = tuple(SOURCE_PARAMETERS.index(p) for p in parameters)
    chunks = chunk_ranges(trials, chunk_size)
    sums = run_ordered(
        partial(_source_score_chunk, positions, truth, model, indices, seed), chunks, workers,
        desc="Score trials", unit="chunks",
    )
    matrix = np.sum(np.stack(sums), axis=0) / trials

    result = EmpiricalFimResult(matrix=matrix, analytic=analytic, trials=trials, seed=seed)
    logger.info(
        f"Empirical source FIM {parameters} over {trials} trials: "
        f"relative Frobenius distance {result.relative_frobenius:.4f}"
    )
    return result
