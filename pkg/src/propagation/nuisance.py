"""
Source FIMs when the transmit power and/or the path-loss exponent are unknown.

The nuisance parameter is appended to the position as a third unknown; the
equivalent 2x2 source FIM is the Schur complement onto the position block and
differs from Psi by a rank-1 loss, represented as a degenerate ellipse.

Usage:
    fim3 = fim_unknown_power(anchors, source, model)
    equivalent, loss = equivalent_fim_unknown_power(anchors, source, model)
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from ..geometry.ellipse import DET_TOL, InfoMatrix2, normalize_angle
from ..utils.errors import SingularFimError
from ..utils.logger import get_logger
from .rss_model import (
    Anchor,
    PropagationModel,
    SourceGeometry,
    bearing_matrix,
    fim_from_geometry,
    lambda_coeff,
    source_geometry,
)

logger = get_logger(__name__)


class Nuisance(Enum):
    POWER = "power"
    GAMMA = "gamma"


@dataclass(frozen=True, eq=False)
class Fim3:
    """3x3 FIM ordered [x_TX, y_TX, nuisance]."""
    matrix: np.ndarray
    nuisance: Nuisance

    @property
    def position_block(self) -> InfoMatrix2:
        return InfoMatrix2.from_array(self.matrix[:2, :2])

    def schur_complement(self) -> InfoMatrix2:
        """Position FIM after marginalizing out the nuisance parameter."""
        corner = self.matrix[2, 2]
        if corner <= 0:
            raise SingularFimError(
                f"No information about the {self.nuisance.value} parameter; "
                f"the Schur complement is undefined"
            )
        cross = self.matrix[:2, 2]
        return InfoMatrix2.from_array(self.matrix[:2, :2] - np.outer(cross, cross) / corner)


@dataclass(frozen=True)
class LossEllipse:
    """Degenerate information-loss ellipse F(magnitude, 0, angle)."""
    magnitude: float
    angle: float

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError(f"Loss magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, 'angle', normalize_angle(self.angle) if self.magnitude > 0 else 0.0)

    def to_fim(self) -> InfoMatrix2:
        return bearing_matrix(self.angle).scaled(self.magnitude)

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {'magnitude': self.magnitude, 'angle': self.angle}


def mean_rss_jacobian(geometry: SourceGeometry, model: PropagationModel) -> np.ndarray:
    """
    Rows [sigma sqrt(lambda) cos, sigma sqrt(lambda) sin, 1, -10 log10(d/d0)].

    These are the derivatives of the mean RSS with respect to [x, y, p_TX, gamma];
    the FIM of any column subset is (1/sigma^2) G^T G.
    """
    sqrt_lambda = np.sqrt(lambda_coeff(model, geometry.distances))
    q = geometry.unit_vectors
    return np.column_stack([
        model.sigma * sqrt_lambda * q[:, 0],
        model.sigma * sqrt_lambda * q[:, 1],
        np.ones(len(geometry.distances)),
        -10.0 * np.log10(geometry.distances / model.d0),
    ])


def _fim_from_columns(geometry: SourceGeometry, model: PropagationModel, columns) -> np.ndarray:
    g = mean_rss_jacobian(geometry, model)[:, columns]
    return g.T @ g / model.sigma ** 2


def fim_unknown_power(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel
) -> Fim3:
    """
    FIM for theta = [x_TX, y_TX, p_TX].

    Cross terms are sum_k sqrt(lambda_k) q_k / sigma and the corner is n / sigma^2;
    nothing depends on the value of p0.
    """
    geometry = source_geometry(anchors, source, model)
    return Fim3(_fim_from_columns(geometry, model, [0, 1, 2]), Nuisance.POWER)


def fim_unknown_gamma(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel
) -> Fim3:
    """
    FIM for theta = [x_TX, y_TX, gamma].

    Cross terms are -(10 sqrt(lambda_k) / sigma) log10(d_k/d0) q_k and the corner is
    (1/sigma^2) sum_k (10 log10(d_k/d0))^2.
    """
    geometry = source_geometry(anchors, source, model)
    return Fim3(_fim_from_columns(geometry, model, [0, 1, 3]), Nuisance.GAMMA)


def fim_unknown_power_gamma(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel
) -> np.ndarray:
    """4x4 FIM for theta = [x_TX, y_TX, p_TX, gamma]."""
    geometry = source_geometry(anchors, source, model)
    return _fim_from_columns(geometry, model, [0, 1, 2, 3])


def power_loss_ellipse(lambdas: Sequence[float], phis: Sequence[float]) -> LossEllipse:
    """
    Loss from an unknown transmit power in closed form.

    a1    = (1/n) sum_i sum_j sqrt(lambda_i lambda_j) cos(phi_i - phi_j)
    beta1 = atan2(sum sqrt(lambda) sin phi, sum sqrt(lambda) cos phi)
    """
    root = np.sqrt(np.asarray(lambdas, dtype=float))
    phi = np.asarray(phis, dtype=float)
    magnitude = float(np.sum(np.outer(root, root) * np.cos(phi[:, None] - phi[None, :]))) / len(phi)
    angle = math.atan2(float(np.sum(root * np.sin(phi))), float(np.sum(root * np.cos(phi))))
    return LossEllipse(max(magnitude, 0.0), angle)


def gamma_loss_ellipse(
    lambdas: Sequence[float],
    phis: Sequence[float],
    log_ratios: Sequence[float]
) -> LossEllipse:
    """
    Loss from an unknown path-loss exponent in closed form.

    With w = sum sqrt(lambda_k) log10(d_k/d0) q_k the loss is w w^T / sum log10(d_k/d0)^2.
    """
    root = np.sqrt(np.asarray(lambdas, dtype=float))
    phi = np.asarray(phis, dtype=float)
    logs = np.asarray(log_ratios, dtype=float)
    denom = float(np.sum(logs ** 2))
    if denom <= 0:
        raise SingularFimError("All anchors lie at d0; the path-loss exponent is unobservable")
    weights = root * logs
    wx, wy = float(np.sum(weights * np.cos(phi))), float(np.sum(weights * np.sin(phi)))
    return LossEllipse((wx * wx + wy * wy) / denom, math.atan2(wy, wx))


def _check_equivalent(equivalent: InfoMatrix2, nuisance: Nuisance) -> InfoMatrix2:
    if equivalent.det <= DET_TOL * equivalent.scale ** 2 or equivalent.scale == 0:
        raise SingularFimError(
            f"Equivalent source FIM with unknown {nuisance.value} is singular; "
            f"the source cannot be localized"
        )
    return equivalent


def equivalent_fim_unknown_power(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel
) -> Tuple[InfoMatrix2, LossEllipse]:
    """
    Equivalent source FIM Psi - F(a1, 0, beta1) for an unknown transmit power.

    Returns:
        (equivalent FIM, loss ellipse)

    Raises:
        SingularFimError: If the equivalent FIM is singular
    """
    if len(anchors) < 2:
        raise ValueError("Unknown transmit power needs at least two anchors")
    geometry = source_geometry(anchors, source, model)
    lambdas = lambda_coeff(model, geometry.distances)
    loss = power_loss_ellipse(lambdas, geometry.bearings)
    equivalent = fim_from_geometry(geometry, model) - loss.to_fim()
    logger.debug(f"Unknown power loss a1={loss.magnitude:.6g} at beta1={loss.angle:.6g}")
    return _check_equivalent(equivalent, Nuisance.POWER), loss


def equivalent_fim_unknown_gamma(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel
) -> Tuple[InfoMatrix2, LossEllipse]:
    """
    Equivalent source FIM Psi - F(a2, 0, beta2) for an unknown path-loss exponent.

    Returns:
        (equivalent FIM, loss ellipse)

    Raises:
        SingularFimError: If the exponent is unobservable or the result is singular
    """
    if len(anchors) < 2:
        raise ValueError("Unknown path-loss exponent needs at least two anchors")
    geometry = source_geometry(anchors, source, model)
    lambdas = lambda_coeff(model, geometry.distances)
    loss = gamma_loss_ellipse(lambdas, geometry.bearings, np.log10(geometry.distances / model.d0))
    equivalent = fim_from_geometry(geometry, model) - loss.to_fim()
    logger.debug(f"Unknown gamma loss a2={loss.magnitude:.6g} at beta2={loss.angle:.6g}")
    return _check_equivalent(equivalent, Nuisance.GAMMA), loss


def singularity_ratio(matrix: np.ndarray) -> float:
    """Smallest over largest singular value; 0 for the zero matrix."""
    values = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if values[0] == 0:
        return 0.0
    return float(values[-1] / values[0])


def joint_power_gamma_singularity(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel
) -> float:
    """
    Condition measure of the 4x4 FIM with both p_TX and gamma unknown.

    The ratio is exactly 0 for equidistant anchors or n <= 3 and is never larger
    than the ratio of either single-nuisance 3x3 FIM.
    """
    ratio = singularity_ratio(fim_unknown_power_gamma(anchors, source, model))
    logger.debug(f"4x4 power/gamma FIM singular-value ratio {ratio:.3e}")
    return ratio
