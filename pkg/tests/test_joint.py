"""Test the joint block FIM, the Schur marginals and the isotropic closed forms."""

import math

import numpy as np
import pytest

from src.geometry.ellipse import fim_to_ellipse, peb
from src.joint import (
    Scenario,
    Source,
    UncertainAnchor,
    all_uncertain_fim_closed_form,
    all_uncertain_source_fim,
    anchor_information_update,
    anchor_marginal_fim,
    assemble_block_fim,
    isotropic_uncertainty_loss,
    multi_source_loss_coeff,
    node_marginal_fim,
    source_marginal_fim,
    uncertain_subset_source_fim,
)
from src.propagation.rss_model import Anchor, lambda_coeff, source_fim, source_geometry
from src.scenario.presets import (
    DEFAULT_MODEL,
    all_uncertain,
    centered_circle,
    extra_known_sources,
    partial_uncertainty,
    single_uncertain_anchor,
)
from src.utils.errors import EmptyParameterVectorError, PreconditionViolationError, UnknownNodeIdError
from src.verification.oracles import full_inverse_marginal, random_scenario, relative_matrix_error


RANDOM_DRAWS = 200


def _marginals(scenario: Scenario) -> dict:
    block = assemble_block_fim(scenario)
    return {
        node_id: node_marginal_fim(scenario, node_id, block).as_array()
        for node_id in block.source_ids + block.anchor_ids
    }


def _assert_loewner_ge(larger: np.ndarray, smaller: np.ndarray) -> None:
    """larger - smaller is PSD up to round-off."""
    tol = 1e-8 * max(np.abs(larger).max(), np.abs(smaller).max())
    assert np.linalg.eigvalsh(larger - smaller)[0] >= -tol


def _two_source_scenario(delta: float = 2.0) -> Scenario:
    anchors = [
        UncertainAnchor.isotropic("a1", 6.0, 0.0, delta),
        Anchor("a2", 0.0, 6.0),
        UncertainAnchor.isotropic("a3", -6.0, 0.0, delta),
        Anchor("a4", 0.0, -6.0),
    ]
    sources = [Source("s1", 1.0, 1.0, sample_count=3), Source("s2", -2.0, 0.5, sample_count=2)]
    return Scenario(model=DEFAULT_MODEL, anchors=anchors, sources=sources)


class TestBlockFim:
    """Layout and block contents of the joint FIM."""

    def test_layout_sources_then_anchors(self):
        block = assemble_block_fim(_two_source_scenario())
        assert block.matrix.shape == (8, 8)
        assert block.source_ids == ["s1", "s2"]
        assert block.anchor_ids == ["a1", "a3"]
        assert block.offsets == {"s1": 0, "s2": 2, "a1": 4, "a3": 6}
        assert np.allclose(block.matrix, block.matrix.T)
        assert np.linalg.eigvalsh(block.matrix)[0] > 0

    def test_source_blocks(self):
        """Xi is block-diagonal with t_j Psi^j summed over all anchors."""
        scenario = _two_source_scenario()
        block = assemble_block_fim(scenario)
        for src in scenario.sources:
            psi = source_fim(scenario.anchors, src.position, scenario.model).as_array()
            assert np.allclose(block.block(src.id), src.sample_count * psi)
        assert np.allclose(block.block("s1", "s2"), 0.0)

    def test_cross_blocks_are_negative_rank_one(self):
        scenario = _two_source_scenario()
        block = assemble_block_fim(scenario)
        src = scenario.source("s1")
        anchor = scenario.anchor("a1")
        geometry = source_geometry([anchor], src.position, scenario.model)
        lam = lambda_coeff(scenario.model, geometry.distances[0])
        q = geometry.unit_vectors[0]
        assert np.allclose(block.block("s1", "a1"), -src.sample_count * lam * np.outer(q, q))

    def test_anchor_blocks(self):
        """Omega_k = a_k K_k^{-1} + sum_j t_j lambda_k^j R_k^j."""
        scenario = _two_source_scenario(delta=2.0)
        block = assemble_block_fim(scenario)
        assert np.allclose(block.anchor_prior["a1"], np.eye(2) / 4.0)
        assert np.allclose(block.block("a1"), block.anchor_prior["a1"] + block.anchor_gain["a1"])
        assert np.allclose(block.block("a1", "a3"), 0.0)

    def test_known_sources_only_feed_anchor_blocks(self):
        scenario = extra_known_sources(count=4)
        block = assemble_block_fim(scenario)
        assert block.source_ids == ["s1"]
        assert len(block.anchor_ids) == 16
        assert block.matrix.shape == (34, 34)

    def test_certain_anchors_collapse_to_source_fim(self):
        scenario = centered_circle(8, 5.0)
        block = assemble_block_fim(scenario)
        assert block.matrix.shape == (2, 2)
        assert block.gamma.shape == (2, 0)
        psi = source_fim(scenario.anchors, [0.0, 0.0], scenario.model)
        assert np.allclose(block.matrix, psi.as_array())

    def test_nothing_unknown(self):
        scenario = Scenario(
            model=DEFAULT_MODEL,
            anchors=[Anchor("a1", 5.0, 0.0), Anchor("a2", 0.0, 5.0), Anchor("a3", -5.0, 0.0)],
            sources=[Source("s1", 0.0, 0.0, known_position=True)],
        )
        with pytest.raises(EmptyParameterVectorError):
            assemble_block_fim(scenario)

    def test_unknown_node_offset(self):
        block = assemble_block_fim(_two_source_scenario())
        with pytest.raises(UnknownNodeIdError, match="a2"):
            block.offset("a2")


class TestMarginals:
    """Schur-complement marginals against the full-inverse oracle."""

    def test_schur_matches_full_inverse_on_random_scenarios(self, rng):
        checked = 0
        while checked < 100:
            scenario = random_scenario(rng, known_sources=int(rng.integers(0, 3)))
            block = assemble_block_fim(scenario)
            if np.linalg.cond(block.matrix) > 1e8:
                continue
            for node_id in block.source_ids + block.anchor_ids:
                schur = node_marginal_fim(scenario, node_id, block).as_array()
                oracle = full_inverse_marginal(scenario, node_id, block).as_array()
                assert relative_matrix_error(schur, oracle) < 1e-8
            checked += 1

    def test_source_decomposition_sums_to_net(self):
        scenario = _two_source_scenario()
        parts = source_marginal_fim(scenario, "s1")
        rebuilt = parts.pure - parts.loss_anchors - parts.loss_other_sources
        assert np.allclose(rebuilt.as_array(), parts.net.as_array())
        for loss in (parts.loss_anchors, parts.loss_other_sources):
            assert np.linalg.eigvalsh(loss.as_array())[0] >= -1e-12

    def test_anchor_decomposition_sums_to_net(self):
        scenario = _two_source_scenario()
        parts = anchor_marginal_fim(scenario, "a1")
        rebuilt = parts.prior + parts.gain_main - parts.loss_unknown_sources - parts.loss_other_anchors
        assert np.allclose(rebuilt.as_array(), parts.net.as_array())
        # the anchor never ends up with less information than its prior
        assert np.linalg.eigvalsh((parts.net - parts.prior).as_array())[0] >= -1e-12

    def test_marginal_never_exceeds_pure_information(self, rng):
        for _ in range(20):
            scenario = random_scenario(rng)
            block = assemble_block_fim(scenario)
            if np.linalg.cond(block.matrix) > 1e8:
                continue
            for node_id in block.source_ids + block.anchor_ids:
                gap = block.block(node_id) - node_marginal_fim(scenario, node_id, block).as_array()
                assert np.linalg.eigvalsh(gap)[0] >= -1e-9 * np.abs(block.block(node_id)).max()

    def test_unknown_ids_rejected(self):
        scenario = _two_source_scenario()
        with pytest.raises(UnknownNodeIdError):
            source_marginal_fim(scenario, "a1")
        with pytest.raises(UnknownNodeIdError):
            anchor_marginal_fim(scenario, "a2")


class TestClosedForms:
    """Isotropic closed forms agree with the generic Schur path."""

    def test_loss_coefficient_below_lambda(self):
        for lam in (1e-3, 0.1, 1.0, 50.0):
            for delta in (0.01, 0.5, 3.0, 100.0):
                loss = isotropic_uncertainty_loss(lam, delta)
                assert 0.0 < loss < lam
        assert isotropic_uncertainty_loss(0.7, 0.0) == 0.0

    def test_loss_coefficient_expanded_form(self):
        lam, delta = 0.4, 1.7
        d2 = delta * delta
        expanded = lam ** 2 * d2 * (1.0 - d2 * lam / (1.0 + lam * d2))
        assert isotropic_uncertainty_loss(lam, delta) == pytest.approx(expanded, rel=1e-14)

    def test_partial_uncertainty_matches_generic(self):
        scenario = partial_uncertainty()
        closed = uncertain_subset_source_fim(scenario).as_array()
        generic = source_marginal_fim(scenario, "s1").net.as_array()
        assert relative_matrix_error(closed, generic) < 1e-10

    def test_all_uncertain_matches_generic(self):
        scenario = all_uncertain(n=16)
        closed = all_uncertain_source_fim(scenario).as_array()
        generic = source_marginal_fim(scenario, "s1").net.as_array()
        assert relative_matrix_error(closed, generic) < 1e-10

    def test_all_uncertain_limits(self):
        scenario = centered_circle(16, 5.0)
        geometry = source_geometry(scenario.anchors, [0.0, 0.0], scenario.model)
        lambdas = lambda_coeff(scenario.model, geometry.distances)
        psi = source_fim(scenario.anchors, [0.0, 0.0], scenario.model).as_array()

        exact = all_uncertain_fim_closed_form(lambdas, geometry.bearings, 0.0).as_array()
        assert np.allclose(exact, psi)
        vague = all_uncertain_fim_closed_form(lambdas, geometry.bearings, 1e6).as_array()
        assert np.abs(vague).max() < 1e-9 * np.abs(psi).max()

    def test_multi_source_loss_matches_generic(self):
        """Net source FIM = sum (lambda_k - dlambda_k) R_k with extra known sources."""
        scenario = extra_known_sources(count=8)
        src = scenario.source("s1")
        geometry = source_geometry(scenario.anchors, src.position, scenario.model)
        lambdas = lambda_coeff(scenario.model, geometry.distances)
        weights = np.array([
            lam - multi_source_loss_coeff(scenario, anchor.id, "s1") if isinstance(anchor, UncertainAnchor) else lam
            for lam, anchor in zip(lambdas, scenario.anchors)
        ])
        q = geometry.unit_vectors
        closed = (q * weights[:, None]).T @ q
        generic = source_marginal_fim(scenario, "s1").net.as_array()
        assert relative_matrix_error(closed, generic) < 1e-10

    def test_multi_source_loss_without_extras_is_single_source_loss(self):
        scenario = partial_uncertainty()
        anchor = scenario.uncertain_anchors[0]
        lam = lambda_coeff(scenario.model, math.hypot(anchor.x, anchor.y))
        expected = isotropic_uncertainty_loss(lam, anchor.isotropic_delta)
        assert multi_source_loss_coeff(scenario, anchor.id, "s1") == pytest.approx(expected, rel=1e-12)

    def test_each_known_source_lowers_the_loss(self):
        base = partial_uncertainty()
        full = extra_known_sources(count=8, base=base)
        anchor_id = base.uncertain_anchors[0].id
        losses = []
        for count in range(0, 9):
            scenario = Scenario(model=base.model, anchors=base.anchors, sources=full.sources[:1 + count])
            losses.append(multi_source_loss_coeff(scenario, anchor_id, "s1"))
        assert all(b <= a * (1 + 1e-12) for a, b in zip(losses, losses[1:]))
        assert losses[-1] < losses[0]

    def test_known_sources_tighten_the_bound(self):
        base = partial_uncertainty()
        with_extras = extra_known_sources(count=8, base=base)
        assert peb(fim_to_ellipse(source_marginal_fim(with_extras, "s1").net)) < peb(
            fim_to_ellipse(source_marginal_fim(base, "s1").net)
        )

    def test_anchor_update_matches_generic(self):
        scenario = single_uncertain_anchor()
        closed = anchor_information_update(scenario, "a1").as_array()
        generic = anchor_marginal_fim(scenario, "a1").net.as_array()
        assert relative_matrix_error(closed, generic) < 1e-10

    def test_preconditions(self):
        scenario = partial_uncertainty()
        repeated = Scenario(
            model=scenario.model,
            anchors=scenario.anchors,
            sources=[Source("s1", 0.0, 0.0, sample_count=2)],
        )
        with pytest.raises(PreconditionViolationError, match="sample_count"):
            uncertain_subset_source_fim(repeated)
        with pytest.raises(PreconditionViolationError, match="every anchor"):
            all_uncertain_source_fim(scenario)
        with pytest.raises(PreconditionViolationError, match="known"):
            anchor_information_update(scenario, scenario.uncertain_anchors[0].id)


class TestMonotonicity:
    """The bound degrades as anchors become less certain."""

    def test_unknown_source_never_adds_information(self, rng):
        for _ in range(RANDOM_DRAWS):
            scenario = random_scenario(rng, max_sources=3, max_uncertain=6, max_anchors=12, known_sources=1)
            before = _marginals(scenario)
            flipped = Scenario(
                model=scenario.model,
                anchors=scenario.anchors,
                sources=[Source(s.id, s.x, s.y, s.sample_count) for s in scenario.sources],
            )
            after = _marginals(flipped)
            assert set(before) < set(after)
            for node_id, info in before.items():
                _assert_loewner_ge(info, after[node_id])

    def test_anchor_net_information_dominates_prior(self, rng):
        checked = 0
        for _ in range(RANDOM_DRAWS):
            scenario = random_scenario(rng, max_sources=3, max_uncertain=6, max_anchors=12, known_sources=1)
            for anchor in scenario.uncertain_anchors:
                parts = anchor_marginal_fim(scenario, anchor.id)
                _assert_loewner_ge(parts.net.as_array(), parts.prior.as_array())
                checked += 1
        assert checked > 0

    def test_known_source_never_removes_information(self, rng):
        for _ in range(RANDOM_DRAWS):
            scenario = random_scenario(rng, max_sources=3, max_uncertain=6, max_anchors=12)
            anchor_xy = np.array([a.position for a in scenario.anchors])
            while True:
                x, y = rng.uniform(-10.0, 10.0, size=2)
                if np.hypot(anchor_xy[:, 0] - x, anchor_xy[:, 1] - y).min() >= 2.0 * scenario.model.d0:
                    break
            extended = Scenario(
                model=scenario.model,
                anchors=scenario.anchors,
                sources=scenario.sources + (Source("k_extra", float(x), float(y), known_position=True),),
            )
            before = _marginals(scenario)
            after = _marginals(extended)
            assert set(before) == set(after)
            for node_id, info in before.items():
                _assert_loewner_ge(after[node_id], info)

    def test_peb_grows_with_delta(self):
        values = [
            peb(fim_to_ellipse(source_marginal_fim(partial_uncertainty(n=16, delta=delta, uncertain=4), "s1").net))
            for delta in (0.1, 0.5, 1.0, 3.0, 10.0)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_peb_grows_with_uncertain_count(self):
        values = [
            peb(fim_to_ellipse(source_marginal_fim(partial_uncertainty(n=16, uncertain=u), "s1").net))
            for u in (1, 4, 8, 16)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_more_samples_shrink_the_error_ellipse(self):
        scenario = _two_source_scenario()
        more = Scenario(
            model=scenario.model,
            anchors=scenario.anchors,
            sources=[Source(s.id, s.x, s.y, sample_count=4 * s.sample_count) for s in scenario.sources],
        )
        assert peb(fim_to_ellipse(node_marginal_fim(more, "s1"))) < peb(
            fim_to_ellipse(node_marginal_fim(scenario, "s1"))
        )


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
