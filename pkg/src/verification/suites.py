"""Verification suites: run an oracle against a scenario and report pass/fail per check."""

from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..geometry.ellipse import ConfidenceScale
from ..joint.network import Scenario
from ..utils.logger import get_logger
from ..utils.settings import SettingsLoader
from .coverage import crlb_coverage, node_covariance_check, run_estimator_trials
from .empirical import empirical_fim
from .oracles import gradient_check, random_scenario, schur_oracle_error

logger = get_logger(__name__)

SUITES = ('gradient-check', 'empirical-fim', 'crlb-coverage', 'schur-oracle')


def _check(name: str, measured: float, tolerance: float, passed: bool, hard: bool = True, **extra) -> Dict:
    entry = {
        'name': name,
        'passed': bool(passed),
        'hard': hard,
        'measured': float(measured),
        'tolerance': float(tolerance),
    }
    entry.update(extra)
    return entry


class BoundVerifier:
    """Checks analytic bounds of a scenario against numerical oracles."""

    def __init__(self, config_path: Path = Path("config.yaml"), workers: Optional[int] = None):
        """
        Initialize verifier.

        Args:
            config_path: Path to config.yaml file
            workers: joblib workers for Monte-Carlo suites (defaults to the environment)
        """
        settings = SettingsLoader(config_path)
        self.settings = settings.get_section('verification')
        self.estimator = settings.get_section('estimator')
        self.workers = workers if workers is not None else settings.worker_count()
        logger.info("Initialized BoundVerifier")

    def verify_gradient(self, scenario: Scenario, seed: int) -> List[Dict]:
        """Analytic score against central differences at random points."""
        tolerance = self.settings['gradient_tol']
        error = gradient_check(scenario, points=self.settings['gradient_points'], seed=seed)
        return [_check('score_vs_central_differences', error, tolerance, error < tolerance,
                       points=self.settings['gradient_points'])]

    def verify_schur(self, scenario: Scenario, seed: int) -> List[Dict]:
        """Schur marginals against full-inverse extraction, on the scenario and random ones."""
        tolerance = self.settings['schur_tol']
        checks = [
            _check('schur_vs_full_inverse', error, tolerance, error < tolerance, node_id=node_id)
            for node_id, error in schur_oracle_error(scenario).items()
        ]

        rng = np.random.default_rng(seed)
        count = self.settings['schur_random_scenarios']
        worst = 0.0
        for _ in range(count):
            errors = schur_oracle_error(random_scenario(rng, model=scenario.model))
            worst = max(worst, max(errors.values()))
        if count:
            checks.append(_check('schur_vs_full_inverse_random', worst, tolerance, worst < tolerance,
                                 scenarios=count))
        return checks

    def verify_empirical_fim(self, scenario: Scenario, trials: int, seed: int) -> List[Dict]:
        """Monte-Carlo score outer products against the assembled block FIM."""
        tolerance = self.settings['empirical_fim_tol']
        result = empirical_fim(scenario, trials, seed, self.settings['chunk_size'], self.workers)
        return [_check('empirical_vs_analytic_fim', result.relative_frobenius, tolerance,
                       result.relative_frobenius < tolerance, trials=trials)]

    def verify_coverage(
        self,
        scenario: Scenario,
        trials: int,
        seed: int,
        confidence: ConfidenceScale
    ) -> List[Dict]:
        """
        Coverage of the k-scaled Error Ellipse and the covariance ordering per node.

        Coverage and trace agreement are hard checks only for asymptotic
        scenarios; below the sample-count threshold they are reported.
        """
        batch = run_estimator_trials(
            scenario, trials, seed,
            init_std_m=self.estimator['init_std_m'],
            max_iters=self.estimator['max_iters'],
            gradient_tol=self.estimator['gradient_tol'],
            chunk_size=self.settings['chunk_size'],
            workers=self.workers,
        )
        se_factor = self.settings['coverage_se_factor']
        trace_tol = self.settings['covariance_trace_tol']
        node_ids = list(scenario.outputs) or scenario.node_ids()

        checks = []
        for node_id in node_ids:
            coverage = crlb_coverage(
                scenario, node_id, trials, confidence, seed,
                convergence_floor=self.settings['convergence_floor'],
                asymptotic_sample_count=self.settings['asymptotic_sample_count'],
                batch=batch,
            )
            checks.append(_check(
                'coverage', coverage.fraction, se_factor * coverage.standard_error,
                coverage.within(se_factor), hard=coverage.asymptotic,
                node_id=node_id, nominal=coverage.p_e, converged=coverage.converged, failed=coverage.failed,
            ))

            covariance = node_covariance_check(scenario, node_id, batch)
            checks.append(_check(
                'covariance_minus_crlb_min_eigenvalue', covariance.min_eigenvalue, -covariance.epsilon,
                covariance.bound_respected, node_id=node_id,
            ))
            checks.append(_check(
                'covariance_trace_ratio', covariance.trace_ratio, trace_tol,
                abs(covariance.trace_ratio - 1.0) <= trace_tol, hard=coverage.asymptotic,
                node_id=node_id,
            ))
        return checks

    def run(
        self,
        scenario: Scenario,
        suite: str,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        confidence: Optional[ConfidenceScale] = None
    ) -> Dict:
        """
        Run one suite.

        Args:
            scenario: Scenario to verify
            suite: One of SUITES
            trials: Monte-Carlo trials (config default when omitted)
            seed: Run seed (config default when omitted)
            confidence: Scale for crlb-coverage (config confidence_p when omitted)

        Returns:
            Dictionary with overall 'passed' and per-check results
        """
        if suite not in SUITES:
            raise ValueError(f"Unknown suite '{suite}'; expected one of {', '.join(SUITES)}")
        trials = trials if trials is not None else self.settings['trials']
        seed = seed if seed is not None else self.settings['seed']

        if suite == 'gradient-check':
            checks = self.verify_gradient(scenario, seed)
        elif suite == 'schur-oracle':
            checks = self.verify_schur(scenario, seed)
        elif suite == 'empirical-fim':
            checks = self.verify_empirical_fim(scenario, trials, seed)
        else:
            confidence = confidence or ConfidenceScale.from_probability(self.settings['confidence_p'])
            checks = self.verify_coverage(scenario, trials, seed, confidence)

        failed = [c for c in checks if c['hard'] and not c['passed']]
        results = {
            'suite': suite,
            'seed': seed,
            'trials': trials,
            'passed': not failed,
            'failed_checks': len(failed),
            'checks': checks,
        }
        logger.info(f"Verification '{suite}': {len(checks) - len(failed)}/{len(checks)} checks passed")
        return results


def main():
    """Run the schur-oracle suite on a preset."""
    from ..scenario.presets import partial_uncertainty
    from ..utils.logger import setup_logger

    setup_logger("src", level=20)

    verifier = BoundVerifier()
    result = verifier.run(partial_uncertainty(), 'schur-oracle')
    print("\n=== schur-oracle ===")
    print(f"Passed: {result['passed']}")
    for check in result['checks']:
        print(f"  - {check['name']} {check.get('node_id', '')}: {check['measured']:.3e}")


if __name__ == "__main__":
    main()
