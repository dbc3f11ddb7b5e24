"""Test the simulator, likelihood, ML estimator and Monte-Carlo oracles."""

import numpy as np
import pytest

from src.geometry.ellipse import ConfidenceScale, crlb_from_fim
from src.joint.block_fim import assemble_block_fim
from src.joint.marginals import node_marginal_fim
from src.propagation.nuisance import singularity_ratio
from src.propagation.rss_model import Anchor, PropagationModel
from src.scenario.presets import asymptotic_circle, centered_circle, partial_uncertainty
from src.utils.errors import InsufficientConvergenceError
from src.utils.parallel import chunk_ranges, run_ordered, trial_rng
from src.verification import (
    SUITES,
    BoundVerifier,
    CoverageResult,
    ObservationDraw,
    covariance_check,
    crlb_coverage,
    empirical_fim,
    empirical_source_fim,
    gradient_check,
    log_likelihood_and_score,
    ml_estimate,
    run_estimator_trials,
    simulate,
    truth_vector,
)
from src.verification.coverage import TrialBatch, node_covariance_check
from src.verification.empirical import SUPPORTED_PARAMETER_SETS
from src.verification.oracles import random_scenario, relative_matrix_error
from src.verification.simulator import mean_observations


def _small_joint():
    """Eight anchors, two of them uncertain, one unknown source."""
    return partial_uncertainty(n=8, d=5.0, delta=1.0, uncertain=2)


def _noiseless_draw(scenario) -> ObservationDraw:
    means = mean_observations(scenario)
    rss = [np.repeat(mean[:, None], src.sample_count, axis=1) for src, mean in zip(scenario.sources, means)]
    priors = {a.id: np.tile(a.position, (a.prior_count, 1)) for a in scenario.uncertain_anchors}
    return ObservationDraw(rss=rss, prior_estimates=priors, means=means)


class TestParallel:
    """Deterministic streams and chunking."""

    def test_trial_streams_depend_only_on_seed_and_index(self):
        first = trial_rng(7, 3).standard_normal(4)
        assert np.array_equal(first, trial_rng(7, 3).standard_normal(4))
        assert not np.array_equal(first, trial_rng(7, 4).standard_normal(4))
        assert not np.array_equal(first, trial_rng(8, 3).standard_normal(4))

    def test_chunk_ranges(self):
        assert chunk_ranges(10, 4) == [(0, 4), (4, 8), (8, 10)]
        assert chunk_ranges(0, 4) == []
        with pytest.raises(ValueError):
            chunk_ranges(10, 0)

    def test_run_ordered_keeps_input_order(self):
        assert run_ordered(abs, [-3, 1, -2], workers=1) == [3, 1, 2]
        assert run_ordered(abs, [-3, 1, -2, 5], workers=2) == [3, 1, 2, 5]


class TestSimulator:
    """Observation draws from the joint model."""

    def test_same_seed_same_draw(self):
        scenario = _small_joint()
        a, b = simulate(scenario, seed=11), simulate(scenario, seed=11)
        assert all(np.array_equal(x, y) for x, y in zip(a.rss, b.rss))
        assert all(np.array_equal(a.prior_estimates[k], b.prior_estimates[k]) for k in a.prior_estimates)

    def test_shapes(self):
        scenario = _small_joint()
        draw = simulate(scenario, seed=0)
        assert draw.rss[0].shape == (8, 1)
        assert set(draw.prior_estimates) == {"a1", "a2"}
        assert draw.prior_estimates["a1"].shape == (1, 2)

    def test_vanishing_noise_returns_means(self):
        quiet = centered_circle(8, 5.0, model=PropagationModel(p0=-30.0, gamma=3.0, d0=1.0, sigma=1e-9))
        draw = simulate(quiet, seed=1)
        assert np.allclose(draw.rss[0][:, 0], mean_observations(quiet)[0], atol=1e-6)

    def test_sample_mean_approaches_mean(self):
        scenario = asymptotic_circle(sample_count=2000)
        draw = simulate(scenario, seed=2)
        spread = np.abs(draw.rss[0].mean(axis=1) - draw.means[0])
        assert spread.max() < 5 * scenario.model.sigma / np.sqrt(2000)


class TestLikelihood:
    """Score function against finite differences and the noiseless optimum."""

    def test_truth_vector_layout(self):
        scenario = _small_joint()
        truth = truth_vector(scenario)
        assert truth.shape == (6,)
        assert np.allclose(truth[:2], [0.0, 0.0])
        assert np.allclose(truth[2:4], scenario.anchors[0].position)

    def test_noiseless_score_vanishes_at_truth(self):
        scenario = _small_joint()
        value, grad = log_likelihood_and_score(scenario, _noiseless_draw(scenario), truth_vector(scenario))
        assert value == pytest.approx(0.0, abs=1e-18)
        assert np.allclose(grad, 0.0, atol=1e-12)

    def test_gradient_matches_central_differences(self):
        assert gradient_check(_small_joint(), points=20, seed=3) < 1e-5

    def test_gradient_with_several_sources(self):
        scenario = random_scenario(np.random.default_rng(5), max_sources=3, max_uncertain=3, max_anchors=8,
                                   known_sources=1)
        assert gradient_check(scenario, points=10, seed=4) < 1e-5


class TestEstimator:
    """BFGS maximum-likelihood oracle."""

    def test_noiseless_estimate_recovers_truth(self):
        scenario = _small_joint()
        truth = truth_vector(scenario)
        start = truth + np.array([0.3, -0.2, 0.1, 0.1, -0.2, 0.05])
        estimate = ml_estimate(scenario, _noiseless_draw(scenario), start)
        assert estimate.converged
        assert np.allclose(estimate.theta_hat, truth, atol=1e-3)

    def test_stationary_start(self):
        scenario = _small_joint()
        estimate = ml_estimate(scenario, _noiseless_draw(scenario), truth_vector(scenario))
        assert estimate.converged
        assert estimate.iterations == 0

    def test_init_shape_checked(self):
        scenario = _small_joint()
        with pytest.raises(ValueError, match="shape"):
            ml_estimate(scenario, simulate(scenario, seed=0), np.zeros(3))

    def test_trials_independent_of_worker_count(self):
        scenario = centered_circle(6, 5.0)
        serial = run_estimator_trials(scenario, trials=8, seed=9, chunk_size=3, workers=1)
        pooled = run_estimator_trials(scenario, trials=8, seed=9, chunk_size=3, workers=2)
        assert np.array_equal(serial.errors, pooled.errors)
        assert np.array_equal(serial.converged, pooled.converged)


class TestEmpiricalFim:
    """Average score outer products against the analytic FIM."""

    def test_matches_block_fim(self):
        scenario = _small_joint()
        result = empirical_fim(scenario, trials=4000, seed=1, chunk_size=500)
        assert result.matrix.shape == assemble_block_fim(scenario).matrix.shape
        assert result.relative_frobenius < 0.1

    @pytest.mark.slow
    def test_matches_block_fim_at_full_scale(self):
        scenario = partial_uncertainty(n=5, d=5.0, delta=1.0, uncertain=1)
        result = empirical_fim(scenario, trials=100_000, seed=1, chunk_size=5000)
        assert result.matrix.shape == (4, 4)
        assert result.relative_frobenius < 0.03

    def test_independent_of_worker_count(self):
        scenario = _small_joint()
        serial = empirical_fim(scenario, trials=300, seed=4, chunk_size=50, workers=1)
        pooled = empirical_fim(scenario, trials=300, seed=4, chunk_size=50, workers=2)
        assert np.array_equal(serial.matrix, pooled.matrix)

    @pytest.mark.parametrize("parameters", SUPPORTED_PARAMETER_SETS)
    def test_source_fim_matches_closed_forms(self, parameters):
        anchors = [Anchor(f"a{k}", x, y) for k, (x, y) in
                   enumerate([(6, 1), (-4, 5), (-3, -7), (8, -6), (1, 9), (-9, -1)], start=1)]
        model = PropagationModel(p0=-40.0, gamma=3.5, d0=1.0, sigma=4.0)
        result = empirical_source_fim(anchors, [0.5, 0.5], model, parameters=parameters, trials=5000, seed=2)
        assert result.matrix.shape == (len(parameters), len(parameters))
        assert result.relative_frobenius < 0.1

    def test_source_fim_detects_a_wrong_gamma_derivative(self):
        anchors = [Anchor(f"a{k}", x, y) for k, (x, y) in enumerate([(6, 1), (-4, 5), (-3, -7), (8, -6)], start=1)]
        model = PropagationModel(p0=-40.0, gamma=3.5, d0=1.0, sigma=4.0)
        result = empirical_source_fim(anchors, [0.5, 0.5], model, parameters=('x', 'y', 'gamma'),
                                      trials=5000, seed=3)
        wrong = result.analytic.copy()
        wrong[2, :] *= 2.0
        wrong[:, 2] *= 2.0
        assert result.relative_frobenius < 0.1
        assert relative_matrix_error(result.matrix, wrong) > 0.5

    def test_equidistant_power_and_gamma_are_not_separable(self):
        scenario = centered_circle(10, 10.0)
        joint = empirical_source_fim(scenario.anchors, [0.0, 0.0], scenario.model, trials=2000, seed=2)
        assert singularity_ratio(joint.analytic) < 1e-10
        assert joint.min_eigenvalue <= 1e-8 * np.abs(joint.matrix).max()

    def test_source_fim_rejects_unsupported_parameters(self):
        scenario = centered_circle(6, 5.0)
        with pytest.raises(ValueError, match="parameters"):
            empirical_source_fim(scenario.anchors, [0.0, 0.0], scenario.model, parameters=('x', 'gamma'))

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            empirical_fim(_small_joint(), trials=0, seed=0)


class TestCoverage:
    """Coverage and covariance checks on synthetic and estimated errors."""

    def test_gaussian_errors_cover_at_nominal_rate(self):
        scenario = centered_circle(8, 5.0)
        crlb = crlb_from_fim(node_marginal_fim(scenario, "s1")).as_array()
        rng = np.random.default_rng(0)
        errors = rng.multivariate_normal(np.zeros(2), crlb, size=20000)
        batch = TrialBatch(errors=errors, converged=np.ones(len(errors), dtype=bool))

        result = crlb_coverage(scenario, "s1", len(errors), ConfidenceScale.from_k(4.0), seed=0, batch=batch)
        assert result.p_e == pytest.approx(1.0 - np.exp(-2.0))
        assert result.within(4.0)
        assert not result.asymptotic

        check = covariance_check(errors, crlb)
        assert check.bound_respected
        assert check.trace_ratio == pytest.approx(1.0, abs=0.05)

    def test_covariance_below_bound_is_flagged(self):
        crlb = np.diag([2.0, 0.5])
        rng = np.random.default_rng(1)
        tight = rng.multivariate_normal(np.zeros(2), 0.25 * crlb, size=5000)
        assert not covariance_check(tight, crlb).bound_respected
        wide = rng.multivariate_normal(np.zeros(2), 4.0 * crlb, size=5000)
        assert covariance_check(wide, crlb).bound_respected

    def test_covariance_check_needs_samples(self):
        with pytest.raises(ValueError, match="two samples"):
            covariance_check(np.zeros((1, 2)), np.eye(2))

    def test_insufficient_convergence(self):
        scenario = centered_circle(8, 5.0)
        converged = np.array([True, False] * 50)
        batch = TrialBatch(errors=np.zeros((100, 2)), converged=converged)
        with pytest.raises(InsufficientConvergenceError, match="50 of 100"):
            crlb_coverage(scenario, "s1", 100, ConfidenceScale.from_k(1.0), seed=0, batch=batch)

    def test_standard_error(self):
        result = CoverageResult("s1", 0.85, 850, 1000, 0, 1000, 4.0, 0.8647, True)
        assert result.standard_error == pytest.approx(np.sqrt(0.8647 * 0.1353 / 1000))
        assert result.within(3.0)
        assert not CoverageResult("s1", 0.80, 800, 1000, 0, 1000, 4.0, 0.8647, True).within(3.0)

    def test_ml_covariance_on_small_batch(self):
        scenario = asymptotic_circle()
        batch = run_estimator_trials(scenario, trials=200, seed=6)
        check = node_covariance_check(scenario, "s1", batch)
        assert check.samples == int(batch.converged.sum())
        assert check.bound_respected
        assert check.trace_ratio == pytest.approx(1.0, abs=0.3)

    @pytest.mark.slow
    def test_ml_coverage_in_asymptotic_regime(self):
        scenario = asymptotic_circle()
        confidence = ConfidenceScale.from_k(4.0)
        batch = run_estimator_trials(scenario, trials=2000, seed=5)
        result = crlb_coverage(scenario, "s1", 2000, confidence, seed=5, batch=batch)
        assert result.asymptotic
        assert result.within(4.0)

        check = node_covariance_check(scenario, "s1", batch)
        assert check.bound_respected
        assert check.trace_ratio == pytest.approx(1.0, abs=0.1)


class TestSuites:
    """BoundVerifier end to end on small scenarios."""

    def test_schur_suite_passes(self, tmp_path):
        verifier = BoundVerifier(tmp_path / "missing.yaml")
        result = verifier.run(partial_uncertainty(n=16, uncertain=4), 'schur-oracle', seed=0)
        assert result['passed']
        assert result['failed_checks'] == 0
        assert {c['name'] for c in result['checks']} == {'schur_vs_full_inverse', 'schur_vs_full_inverse_random'}

    def test_gradient_suite_passes(self, tmp_path):
        config = tmp_path / "config.yaml"
        config.write_text("verification:\n  gradient_points: 10\n", encoding='utf-8')
        result = BoundVerifier(config).run(_small_joint(), 'gradient-check', seed=1)
        assert result['passed']
        assert result['checks'][0]['points'] == 10

    def test_unknown_suite(self, tmp_path):
        with pytest.raises(ValueError, match="Unknown suite"):
            BoundVerifier(tmp_path / "missing.yaml").run(_small_joint(), 'bogus')

    def test_suite_names(self):
        assert SUITES == ('gradient-check', 'empirical-fim', 'crlb-coverage', 'schur-oracle')


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
