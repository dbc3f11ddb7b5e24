"""
Closed-form marginal FIMs for isotropic anchor uncertainty K_k = Delta^2 I.

All forms assume one sample per source-anchor pair and one prior estimate per
uncertain anchor (t = a_k = 1); each function checks the scenario shape and
raises PreconditionViolationError otherwise.
"""

from typing import Optional, Sequence

import numpy as np

from ..geometry.ellipse import InfoMatrix2
from ..propagation.rss_model import lambda_coeff, source_geometry
from ..utils.errors import PreconditionViolationError, UnknownNodeIdError
from ..utils.logger import get_logger
from .network import Scenario, Source, UncertainAnchor

logger = get_logger(__name__)


def isotropic_uncertainty_loss(lam: float, delta: float) -> float:
    """
    Reduction of lambda_k when anchor k is uncertain with K_k = Delta^2 I.

        dlambda_k = lambda_k^2 Delta^2 (1 - Delta^2 lambda_k / (1 + lambda_k Delta^2))
                  = lambda_k^2 Delta^2 / (1 + lambda_k Delta^2)  < lambda_k
    """
    if lam < 0 or delta < 0:
        raise ValueError("lambda and delta must be non-negative")
    d2 = delta * delta
    return lam * lam * d2 / (1.0 + lam * d2)


def all_uncertain_fim_closed_form(
    lambdas: Sequence[float],
    phis: Sequence[float],
    delta: float
) -> InfoMatrix2:
    """
    Source FIM sum_k lambda_k / (1 + lambda_k Delta^2) R_k when every anchor is uncertain.

    Delta = 0 gives Psi; the result vanishes as Delta grows.
    """
    lam = np.asarray(lambdas, dtype=float)
    phi = np.asarray(phis, dtype=float)
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta}")
    weights = lam / (1.0 + lam * delta * delta)
    q = np.column_stack([np.cos(phi), np.sin(phi)])
    return InfoMatrix2.from_array((q * weights[:, None]).T @ q)


def _require_unit_counts(scenario: Scenario) -> None:
    if any(s.sample_count != 1 for s in scenario.sources):
        raise PreconditionViolationError("Closed forms require sample_count = 1 for every source")
    for anchor in scenario.uncertain_anchors:
        if anchor.prior_count != 1:
            raise PreconditionViolationError(
                f"Closed forms require prior_count = 1 (anchor '{anchor.id}')"
            )
        if anchor.isotropic_delta is None:
            raise PreconditionViolationError(
                f"Closed forms require isotropic prior_cov = Delta^2 I (anchor '{anchor.id}')"
            )


def _single_unknown_source(scenario: Scenario) -> Source:
    unknown = scenario.unknown_sources
    if len(scenario.sources) != 1 or len(unknown) != 1:
        raise PreconditionViolationError(
            "Closed form requires exactly one source, with unknown position"
        )
    return unknown[0]


def uncertain_subset_source_fim(scenario: Scenario) -> InfoMatrix2:
    """
    Source FIM Psi - sum_{k in U} dlambda_k R_k for a single source.

    Certain anchors keep their full lambda_k; each uncertain anchor loses
    dlambda_k from isotropic_uncertainty_loss with its own Delta_k.

    Raises:
        PreconditionViolationError: On a mismatched scenario shape
    """
    _require_unit_counts(scenario)
    src = _single_unknown_source(scenario)
    geometry = source_geometry(scenario.anchors, src.position, scenario.model, src.id)
    lambdas = lambda_coeff(scenario.model, geometry.distances)

    weights = np.array([
        lam - isotropic_uncertainty_loss(lam, anchor.isotropic_delta)
        if isinstance(anchor, UncertainAnchor) else lam
        for lam, anchor in zip(lambdas, scenario.anchors)
    ])
    q = geometry.unit_vectors
    return InfoMatrix2.from_array((q * weights[:, None]).T @ q)


def all_uncertain_source_fim(scenario: Scenario) -> InfoMatrix2:
    """
    Source FIM sum_k lambda_k / (1 + lambda_k Delta^2) R_k when U = N.

    Raises:
        PreconditionViolationError: If some anchor is certain, Deltas differ,
            or the scenario shape does not match
    """
    _require_unit_counts(scenario)
    src = _single_unknown_source(scenario)
    if scenario.certain_anchors or not scenario.anchors:
        raise PreconditionViolationError("Closed form requires every anchor to be uncertain")
    deltas = {anchor.isotropic_delta for anchor in scenario.uncertain_anchors}
    if len(deltas) != 1:
        raise PreconditionViolationError("Closed form requires one common Delta for all anchors")

    geometry = source_geometry(scenario.anchors, src.position, scenario.model, src.id)
    lambdas = lambda_coeff(scenario.model, geometry.distances)
    return all_uncertain_fim_closed_form(lambdas, geometry.bearings, deltas.pop())


def multi_source_loss_coeff(scenario: Scenario, anchor_id: str, source_id: str) -> float:
    """
    Reduction dlambda_k^j of anchor k's contribution to source j when the other
    sources are active at known positions.

        dlambda_k^j = (lambda_k^j)^2 Delta^2 (1 - Delta^2 sum_p q_j^T lambda^p
                      (I + Delta^2 sum_i lambda^i R^i)^{-1} R^p q_j)

    with p and i running over every source. Each extra known source lowers it.

    Raises:
        PreconditionViolationError: If the scenario shape does not match
        UnknownNodeIdError: If the anchor is not uncertain
    """
    _require_unit_counts(scenario)
    target = scenario.source(source_id)
    if target.known_position:
        raise PreconditionViolationError(f"Source '{source_id}' must have unknown position")
    if any(not s.known_position for s in scenario.sources if s.id != source_id):
        raise PreconditionViolationError("Every source other than the target must have known position")

    anchor = scenario.anchor(anchor_id)
    if not isinstance(anchor, UncertainAnchor):
        raise UnknownNodeIdError(f"'{anchor_id}' is not an uncertain anchor")
    d2 = anchor.isotropic_delta ** 2

    # lambda^p q_p for every source p, as seen from anchor k
    terms = []
    q_target: Optional[np.ndarray] = None
    lam_target = 0.0
    for src in scenario.sources:
        geometry = source_geometry([anchor], src.position, scenario.model, src.id)
        lam = float(lambda_coeff(scenario.model, geometry.distances[0]))
        q = geometry.unit_vectors[0]
        terms.append((lam, q))
        if src.id == source_id:
            q_target, lam_target = q, lam

    info = sum(lam * np.outer(q, q) for lam, q in terms)
    inner = np.linalg.inv(np.eye(2) + d2 * info)
    correction = sum(lam * float(q_target @ inner @ np.outer(q, q) @ q_target) for lam, q in terms)
    return lam_target * lam_target * d2 * (1.0 - d2 * correction)


def anchor_information_update(scenario: Scenario, anchor_id: str) -> InfoMatrix2:
    """
    Anchor FIM K_k^{-1} + sum_j lambda_k^j R_k^j when every source position is known.

    Raises:
        PreconditionViolationError: If some source has unknown position
    """
    if scenario.unknown_sources:
        raise PreconditionViolationError("Closed form requires every source position to be known")
    anchor = scenario.anchor(anchor_id)
    if not isinstance(anchor, UncertainAnchor):
        raise UnknownNodeIdError(f"'{anchor_id}' is not an uncertain anchor")
    if anchor.prior_count != 1 or any(s.sample_count != 1 for s in scenario.sources):
        raise PreconditionViolationError("Closed form requires t = a_k = 1")

    total = anchor.prior_information
    for src in scenario.sources:
        geometry = source_geometry([anchor], src.position, scenario.model, src.id)
        lam = float(lambda_coeff(scenario.model, geometry.distances[0]))
        q = geometry.unit_vectors[0]
        total = total + InfoMatrix2.from_array(lam * np.outer(q, q))
    return total
