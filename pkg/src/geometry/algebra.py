"""
Closed-form addition and subtraction of Information Ellipses.

Information from independent observations adds, so the sum of two IEs is the
IE of the matrix sum. Subtraction models information loss and is only defined
while the difference stays positive definite.
"""

import math
from enum import Enum
from typing import Tuple

from ..utils.errors import IllConditionedSubtractionError, SingularFimError
from ..utils.logger import get_logger
from .ellipse import DET_TOL, PSD_TOL, EllipseParams, normalize_angle

logger = get_logger(__name__)


class CombineSign(Enum):
    ADD = "add"
    SUBTRACT = "subtract"

    @property
    def factor(self) -> float:
        return 1.0 if self is CombineSign.ADD else -1.0


class ExtremalObjective(Enum):
    MAX_INFO = "max_info"
    MIN_INFO = "min_info"


def _combined_invariants(
    e1: EllipseParams,
    e2: EllipseParams,
    sign: CombineSign
) -> Tuple[float, float, float, float]:
    """
    Trace, determinant, eigenvalue spread D and angle of F1 +/- F2.

    Everything is expressed in the frame of E1, with delta = alpha2 - alpha1.
    """
    s = sign.factor
    delta = e2.angle - e1.angle
    sin2, cos2 = math.sin(2 * delta), math.cos(2 * delta)
    sin_sq, cos_sq = math.sin(delta) ** 2, math.cos(delta) ** 2

    a = e1.major - e1.minor
    b = e2.major - e2.minor

    trace = e1.major + e1.minor + s * (e2.major + e2.minor)
    det = (
        e1.major * e1.minor
        + e2.major * e2.minor
        + s * (e1.major * e2.major + e1.minor * e2.minor) * sin_sq
        + s * (e1.major * e2.minor + e1.minor * e2.major) * cos_sq
    )
    numerator = s * b * sin2
    denominator = a + s * b * cos2
    spread = math.hypot(denominator, numerator)

    if spread <= PSD_TOL * max(e1.major, e2.major):
        angle = e1.angle
    else:
        angle = e1.angle + 0.5 * math.atan2(numerator, denominator)
    return trace, det, spread, angle


def combine(e1: EllipseParams, e2: EllipseParams, sign: CombineSign) -> EllipseParams:
    """
    IE of ellipse_to_fim(E1) +/- ellipse_to_fim(E2).

    Args:
        e1: First ellipse
        e2: Second ellipse
        sign: CombineSign.ADD or CombineSign.SUBTRACT

    Returns:
        Combined EllipseParams. A subtraction whose minor eigenvalue vanishes
        within tolerance comes back with minor = 0 (see is_degenerate).

    Raises:
        IllConditionedSubtractionError: If F1 - F2 is not positive definite
    """
    trace, det, spread, angle = _combined_invariants(e1, e2, sign)
    scale = max(e1.major, e2.major)

    mu = 0.5 * (trace + spread)
    if mu > 0 and det > 0:
        eta = min(det / mu, mu)
    else:
        eta = 0.5 * (trace - spread)

    if sign is CombineSign.SUBTRACT:
        tol = PSD_TOL * scale
        if mu <= tol or eta < -tol:
            raise IllConditionedSubtractionError(
                f"F1 - F2 is not positive definite (eigenvalues {mu:.6g}, {eta:.6g})"
            )
        if eta <= tol:
            logger.warning(
                f"Subtraction leaves a degenerate ellipse (minor={eta:.3e}); clamped to 0"
            )
            eta = 0.0

    return EllipseParams(max(mu, 0.0), max(eta, 0.0), angle)


def combined_peb(e1: EllipseParams, e2: EllipseParams, sign: CombineSign) -> float:
    """
    PEB of the combined ellipse, sqrt(trace / det), without the eigendecomposition.

    Raises:
        IllConditionedSubtractionError: If the subtraction is invalid
        SingularFimError: If the combined information is singular
    """
    if sign is CombineSign.SUBTRACT:
        combine(e1, e2, sign)

    trace, det, _, _ = _combined_invariants(e1, e2, sign)
    scale = max(e1.major, e2.major)
    if det <= DET_TOL * scale * scale:
        raise SingularFimError(f"Combined information is singular (det={det:.3e})")
    return math.sqrt(trace / det)


def extremal_angle(
    e1: EllipseParams,
    mu2: float,
    eta2: float,
    sign: CombineSign,
    objective: ExtremalObjective
) -> float:
    """
    Orientation of the second ellipse that extremizes the combined information.

    Adding information helps most when it is orthogonal to E1's strong axis;
    removing information hurts least when it is aligned with it.

    Args:
        e1: Fixed ellipse
        mu2: Major eigenvalue of the second ellipse
        eta2: Minor eigenvalue of the second ellipse
        sign: CombineSign
        objective: MAX_INFO (smallest PEB) or MIN_INFO (largest PEB)

    Returns:
        Angle for the second ellipse, normalized to (-pi/2, pi/2]

    Raises:
        IllConditionedSubtractionError: If the subtraction is invalid at that angle
    """
    if not mu2 >= eta2 >= 0:
        raise ValueError(f"Expected mu2 >= eta2 >= 0, got ({mu2}, {eta2})")

    aligned = (sign is CombineSign.ADD) == (objective is ExtremalObjective.MIN_INFO)
    angle = normalize_angle(e1.angle if aligned else e1.angle + math.pi / 2)

    if sign is CombineSign.SUBTRACT:
        combine(e1, EllipseParams(mu2, eta2, angle), sign)
    return angle
