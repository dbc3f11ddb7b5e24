"""
Monte-Carlo checks of the bounds with the ML estimator.

crlb_coverage     fraction of estimates inside the node's k-scaled Error Ellipse
covariance_check  empirical estimator covariance against the CRLB
"""

from dataclasses import dataclass
from functools import partial
from typing import List, Tuple

import numpy as np

from ..geometry.ellipse import ConfidenceScale, crlb_from_fim, ellipse_contains, error_ellipse
from ..joint.marginals import node_marginal_fim
from ..joint.network import Scenario
from ..utils.errors import InsufficientConvergenceError
from ..utils.logger import get_logger
from ..utils.parallel import chunk_ranges, run_ordered, trial_rng
from .estimator import ml_estimate, perturbed_init
from .likelihood import node_slices, truth_vector
from .simulator import mean_observations, simulate

logger = get_logger(__name__)


@dataclass(eq=False)
class TrialBatch:
    """Estimation errors theta_hat - theta of every trial, with a convergence mask."""
    errors: np.ndarray
    converged: np.ndarray

    @property
    def trials(self) -> int:
        return len(self.converged)

    @property
    def failed(self) -> int:
        return int(np.count_nonzero(~self.converged))


@dataclass(frozen=True)
class CoverageResult:
    node_id: str
    fraction: float
    inside: int
    converged: int
    failed: int
    trials: int
    k: float
    p_e: float
    asymptotic: bool

    @property
    def standard_error(self) -> float:
        """Binomial MC standard error of the fraction under the nominal P_e."""
        return float(np.sqrt(self.p_e * (1.0 - self.p_e) / max(self.converged, 1)))

    def within(self, se_factor: float = 3.0) -> bool:
        return abs(self.fraction - self.p_e) <= se_factor * self.standard_error

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {
            'node_id': self.node_id,
            'fraction': self.fraction,
            'inside': self.inside,
            'converged': self.converged,
            'failed': self.failed,
            'trials': self.trials,
            'k': self.k,
            'p_e': self.p_e,
            'standard_error': self.standard_error,
            'asymptotic': self.asymptotic,
        }


@dataclass(frozen=True)
class CovarianceCheck:
    trace_ratio: float          # trace(empirical cov) / trace(CRLB)
    min_eigenvalue: float       # smallest eigenvalue of empirical cov - CRLB
    epsilon: float              # 3 MC standard errors
    samples: int

    @property
    def bound_respected(self) -> bool:
        return self.min_eigenvalue >= -self.epsilon

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {
            'trace_ratio': self.trace_ratio,
            'min_eigenvalue': self.min_eigenvalue,
            'epsilon': self.epsilon,
            'samples': self.samples,
            'bound_respected': self.bound_respected,
        }


def _estimator_chunk(
    scenario: Scenario,
    seed: int,
    init_std_m: float,
    max_iters: int,
    gradient_tol: float,
    bounds: Tuple[int, int]
) -> Tuple[np.ndarray, np.ndarray]:
    truth = truth_vector(scenario)
    means = mean_observations(scenario)
    errors: List[np.ndarray] = []
    converged: List[bool] = []
    for index in range(*bounds):
        rng = trial_rng(seed, index)
        obs = simulate(scenario, rng=rng, means=means)
        estimate = ml_estimate(scenario, obs, perturbed_init(scenario, rng, init_std_m), max_iters, gradient_tol)
        errors.append(estimate.theta_hat - truth)
        converged.append(estimate.converged)
    return np.array(errors).reshape(len(converged), truth.size), np.array(converged, dtype=bool)


def run_estimator_trials(
    scenario: Scenario,
    trials: int,
    seed: int,
    init_std_m: float = 0.5,
    max_iters: int = 500,
    gradient_tol: float = 1e-6,
    chunk_size: int = 1000,
    workers: int = 1
) -> TrialBatch:
    """Simulate and estimate `trials` times; results are independent of worker count."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    worker = partial(_estimator_chunk, scenario, seed, init_std_m, max_iters, gradient_tol)
    parts = run_ordered(worker, chunk_ranges(trials, chunk_size), workers, desc="ML trials", unit="chunks")
    batch = TrialBatch(
        errors=np.vstack([p[0] for p in parts]),
        converged=np.concatenate([p[1] for p in parts]),
    )
    if batch.failed:
        logger.warning(f"Excluded {batch.failed} of {batch.trials} non-converged estimator runs")
    return batch


def crlb_coverage(
    scenario: Scenario,
    node_id: str,
    trials: int,
    confidence: ConfidenceScale,
    seed: int,
    convergence_floor: float = 0.95,
    asymptotic_sample_count: int = 50,
    batch: TrialBatch = None,
    **trial_options
) -> CoverageResult:
    """
    Fraction of converged ML estimates inside the node's Error Ellipse scaled by k.

    A point e is inside when e^T F_net e <= k.

    Args:
        scenario: Scenario
        node_id: Unknown-position node
        trials: Monte-Carlo trials
        confidence: Ellipse scale and nominal probability
        seed: Run seed
        convergence_floor: Minimum share of converged runs
        asymptotic_sample_count: t at or above which the scenario counts as asymptotic
        batch: Reuse an existing TrialBatch instead of running new trials
        **trial_options: Forwarded to run_estimator_trials

    Raises:
        InsufficientConvergenceError: If fewer than convergence_floor of the runs converge
        UnknownNodeIdError: If node_id is not an unknown-position node
    """
    net = node_marginal_fim(scenario, node_id)
    slot = node_slices(scenario)[node_id]
    if batch is None:
        batch = run_estimator_trials(scenario, trials, seed, **trial_options)

    if batch.trials - batch.failed < convergence_floor * batch.trials:
        raise InsufficientConvergenceError(batch.failed, batch.trials, convergence_floor)

    errors = batch.errors[batch.converged][:, slot]
    inside = int(np.count_nonzero(ellipse_contains(error_ellipse(net), errors, confidence.k)))
    converged = len(errors)
    result = CoverageResult(
        node_id=node_id,
        fraction=inside / converged,
        inside=inside,
        converged=converged,
        failed=batch.failed,
        trials=batch.trials,
        k=confidence.k,
        p_e=confidence.p_e,
        asymptotic=min(s.sample_count for s in scenario.sources) >= asymptotic_sample_count,
    )
    logger.info(
        f"Coverage of '{node_id}': {result.fraction:.4f} vs nominal {confidence.p_e:.4f} "
        f"({converged} converged runs)"
    )
    return result


def covariance_check(errors: np.ndarray, crlb: np.ndarray) -> CovarianceCheck:
    """
    Compare the empirical covariance of estimation errors with a CRLB.

    The tolerance on the smallest eigenvalue of cov - CRLB is three standard
    errors of a sample covariance, 3 sqrt(2/N) lambda_max(CRLB).

    Args:
        errors: (N, d) estimation errors of converged runs
        crlb: (d, d) bound
    """
    errors = np.asarray(errors, dtype=float)
    crlb = np.asarray(crlb, dtype=float)
    samples = errors.shape[0]
    if samples < 2:
        raise ValueError("covariance_check needs at least two samples")
    cov = np.cov(errors, rowvar=False).reshape(crlb.shape)
    epsilon = 3.0 * np.sqrt(2.0 / samples) * float(np.linalg.eigvalsh(crlb)[-1])
    return CovarianceCheck(
        trace_ratio=float(np.trace(cov) / np.trace(crlb)),
        min_eigenvalue=float(np.linalg.eigvalsh(cov - crlb)[0]),
        epsilon=epsilon,
        samples=samples,
    )


def node_covariance_check(scenario: Scenario, node_id: str, batch: TrialBatch) -> CovarianceCheck:
    """covariance_check for one node's coordinates against its marginal CRLB."""
    crlb = crlb_from_fim(node_marginal_fim(scenario, node_id)).as_array()
    errors = batch.errors[batch.converged][:, node_slices(scenario)[node_id]]
    return covariance_check(errors, crlb)
