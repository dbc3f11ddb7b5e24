"""
Log-distance path-loss model and the single-source FIM with known anchors.

Each anchor contributes a rank-1 term lambda_k R_k to the source FIM, where
lambda_k scales with 1/d_k^2 and R_k = q_k q_k^T is the bearing matrix of the
unit vector from the source to the anchor.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ..geometry.ellipse import DET_TOL, EllipseParams, InfoMatrix2
from ..utils.errors import BelowReferenceDistanceError
from ..utils.logger import get_logger

logger = get_logger(__name__)

LN10 = math.log(10.0)

# Bearings closer than this (radians, modulo pi) count as the same line
COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class PropagationModel:
    """Log-distance path loss with log-normal shadowing."""
    p0: float = 0.0       # dBm at d0 (p_TX - L0)
    gamma: float = 3.5    # path-loss exponent
    d0: float = 1.0       # m
    sigma: float = 5.0    # dB

    def __post_init__(self):
        for name in ('p0', 'gamma', 'd0', 'sigma'):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"PropagationModel.{name} must be finite")
        if self.gamma <= 0:
            raise ValueError(f"Path-loss exponent gamma must be positive, got {self.gamma}")
        if self.d0 <= 0:
            raise ValueError(f"Reference distance d0 must be positive, got {self.d0}")
        if self.sigma <= 0:
            raise ValueError(f"Shadowing sigma must be positive, got {self.sigma}")

    def to_dict(self) -> dict:
        """Convert to dictionary format (scenario document field names)."""
        return {
            'p0_dbm': self.p0,
            'gamma': self.gamma,
            'd0_m': self.d0,
            'sigma_db': self.sigma,
        }


@dataclass(frozen=True)
class Anchor:
    """Receiver at a precisely known position."""
    id: str
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Anchor '{self.id}' has non-finite coordinates")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class SourceGeometry:
    """Distances and bearings from a source to every anchor."""
    position: np.ndarray
    anchor_ids: tuple
    distances: np.ndarray = field(repr=False)
    bearings: np.ndarray = field(repr=False)

    @property
    def unit_vectors(self) -> np.ndarray:
        """(n, 2) array of q_k = [cos phi_k, sin phi_k]."""
        return np.column_stack([np.cos(self.bearings), np.sin(self.bearings)])


def _check_distance(distance: float, model: PropagationModel) -> None:
    if distance < model.d0:
        raise BelowReferenceDistanceError(distance, model.d0)


def mean_rss(model: PropagationModel, d: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Mean received power p0 - 10 gamma log10(d / d0) in dBm.

    Raises:
        BelowReferenceDistanceError: If any distance is below d0
    """
    dist = np.asarray(d, dtype=float)
    if np.any(dist < model.d0):
        _check_distance(float(np.min(dist)), model)
    value = model.p0 - 10.0 * model.gamma * np.log10(dist / model.d0)
    return float(value) if dist.ndim == 0 else value


def lambda_coeff(model: PropagationModel, d: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Per-anchor information coefficient ((1/sigma)(10 gamma / ln 10)(1/d))^2 in 1/m^2.

    Raises:
        BelowReferenceDistanceError: If any distance is below d0
    """
    dist = np.asarray(d, dtype=float)
    if np.any(dist < model.d0):
        _check_distance(float(np.min(dist)), model)
    value = (10.0 * model.gamma / (model.sigma * LN10 * dist)) ** 2
    return float(value) if dist.ndim == 0 else value


def bearing_matrix(phi: float) -> InfoMatrix2:
    """Rank-1 idempotent matrix R = q q^T for q = [cos phi, sin phi]."""
    c, s = math.cos(phi), math.sin(phi)
    return InfoMatrix2(c * c, c * s, s * s)


def source_geometry(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel,
    source_id: Optional[str] = None
) -> SourceGeometry:
    """
    Distances d_k and bearings phi_k = atan2(y_k - y, x_k - x) of each anchor.

    Raises:
        BelowReferenceDistanceError: Naming the first offending anchor
    """
    position = np.asarray(source, dtype=float)
    distances = []
    bearings = []
    for anchor in anchors:
        dx, dy = anchor.x - position[0], anchor.y - position[1]
        distance = math.hypot(dx, dy)
        if distance < model.d0:
            raise BelowReferenceDistanceError(distance, model.d0, source_id, anchor.id)
        distances.append(distance)
        bearings.append(math.atan2(dy, dx))

    return SourceGeometry(
        position=position,
        anchor_ids=tuple(a.id for a in anchors),
        distances=np.array(distances),
        bearings=np.array(bearings),
    )


def degenerate_geometry(bearings: Sequence[float]) -> bool:
    """True when every bearing lies on one line through the source."""
    phis = np.asarray(bearings, dtype=float)
    if phis.size == 0:
        return True
    return bool(np.all(np.abs(np.sin(phis - phis[0])) <= COLLINEAR_TOL))


def fim_from_geometry(geometry: SourceGeometry, model: PropagationModel) -> InfoMatrix2:
    """Sum of lambda_k R_k over a precomputed geometry."""
    lambdas = lambda_coeff(model, geometry.distances)
    q = geometry.unit_vectors
    return InfoMatrix2.from_array((q * lambdas[:, None]).T @ q)


def source_fim(
    anchors: Sequence[Anchor],
    source: Sequence[float],
    model: PropagationModel,
    source_id: Optional[str] = None
) -> InfoMatrix2:
    """
    Single-source FIM Psi = sum_k lambda_k R_k for precisely known anchors.

    A singular result (all anchors on one bearing line) is returned with a
    warning; check degenerate_geometry() for the flag.

    Args:
        anchors: At least one anchor
        source: Source position (m)
        model: Propagation model
        source_id: Optional id used in error messages

    Returns:
        InfoMatrix2

    Raises:
        BelowReferenceDistanceError: If any d_k < d0
    """
    if not anchors:
        raise ValueError("source_fim needs at least one anchor")
    geometry = source_geometry(anchors, source, model, source_id)
    fim = fim_from_geometry(geometry, model)

    if degenerate_geometry(geometry.bearings):
        logger.warning(
            f"Degenerate geometry for source {source_id or tuple(geometry.position)}: "
            f"all {len(anchors)} anchors lie on one bearing line, FIM is singular"
        )
    return fim


def source_ie_closed_form(lambdas: Sequence[float], phis: Sequence[float]) -> EllipseParams:
    """
    IE parameters of sum_k lambda_k R(phi_k) without a numeric eigensolver.

    mu, eta = (sum lambda +/- sqrt(sum_i sum_j lambda_i lambda_j cos 2(phi_i - phi_j))) / 2
    alpha   = atan2(sum lambda sin 2phi, sum lambda cos 2phi) / 2

    Args:
        lambdas: Positive coefficients
        phis: Bearings (radians), same length

    Returns:
        EllipseParams
    """
    lam = np.asarray(lambdas, dtype=float)
    phi = np.asarray(phis, dtype=float)
    if lam.shape != phi.shape or lam.size == 0:
        raise ValueError("lambdas and phis must be non-empty and of equal length")
    if np.any(lam <= 0):
        raise ValueError("lambda coefficients must be positive")

    total = float(lam.sum())
    pair = np.outer(lam, lam)
    diff = phi[:, None] - phi[None, :]
    spread = math.sqrt(max(float(np.sum(pair * np.cos(2.0 * diff))), 0.0))
    mu = 0.5 * (total + spread)

    # det(sum lambda R) = sum_{i<j} lambda_i lambda_j sin^2(phi_i - phi_j)
    det = 0.5 * float(np.sum(pair * np.sin(diff) ** 2))
    eta = min(det / mu, mu) if mu > 0 else 0.0
    if eta <= DET_TOL * mu:
        eta = 0.0

    alpha = 0.5 * math.atan2(float(np.sum(lam * np.sin(2 * phi))), float(np.sum(lam * np.cos(2 * phi))))
    return EllipseParams(mu, eta, alpha)


def equal_spacing_cosine_sum(n: int, phi1: float = 0.0) -> float:
    """
    Numeric value of sum_{i<j} cos 2(phi_i - phi_j) for phi_i = phi1 + (i-1) 2pi/n.

    Equals -n/2 for every n >= 3.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    phis = phi1 + np.arange(n) * 2.0 * math.pi / n
    diff = phis[:, None] - phis[None, :]
    upper = np.triu_indices(n, k=1)
    return float(np.sum(np.cos(2.0 * diff[upper])))


def circle_scenario_ie(n: int, d: float, model: PropagationModel, phi1: float = 0.0) -> EllipseParams:
    """
    IE of a source at the centre of n anchors equally spaced on a circle of radius d.

    With the cosine sum S = -n/2 the spread term vanishes and mu = eta = n lambda / 2
    for every rotation phi1 of the ring.

    Raises:
        BelowReferenceDistanceError: If d < d0
    """
    if n < 3:
        raise ValueError(f"Circle closed form needs n >= 3 anchors, got {n}")
    lam = lambda_coeff(model, d)
    cosine_sum = -n / 2.0
    spread = lam * math.sqrt(max(n + 2.0 * cosine_sum, 0.0))
    return EllipseParams(0.5 * (n * lam + spread), 0.5 * (n * lam - spread), 0.0)
