"""Monte-Carlo and finite-difference oracles for the analytic bounds."""

from .coverage import CoverageResult, CovarianceCheck, covariance_check, crlb_coverage, run_estimator_trials
from .empirical import EmpiricalFimResult, empirical_fim, empirical_source_fim
from .estimator import MlEstimate, ml_estimate, perturbed_init
from .likelihood import log_likelihood_and_score, score, truth_vector
from .oracles import eigh_ellipse, full_inverse_marginal, gradient_check, random_scenario
from .simulator import ObservationDraw, simulate
from .suites import SUITES, BoundVerifier

__all__ = [
    'SUITES',
    'BoundVerifier',
    'CoverageResult',
    'CovarianceCheck',
    'EmpiricalFimResult',
    'MlEstimate',
    'ObservationDraw',
    'covariance_check',
    'crlb_coverage',
    'eigh_ellipse',
    'empirical_fim',
    'empirical_source_fim',
    'full_inverse_marginal',
    'gradient_check',
    'log_likelihood_and_score',
    'ml_estimate',
    'perturbed_init',
    'random_scenario',
    'run_estimator_trials',
    'score',
    'simulate',
    'truth_vector',
]
