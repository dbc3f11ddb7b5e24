"""
2x2 information matrices and their geometric duals.

An information matrix F is represented by the Information Ellipse
IE(mu, eta, alpha): F = Theta(alpha) diag(mu, eta) Theta(alpha)^T with
mu >= eta >= 0. Its inverse (the CRLB) is the Error Ellipse
EE(1/eta, 1/mu, alpha + pi/2).
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..utils.errors import DegenerateInputError, NotPSDError, SingularFimError
from ..utils.logger import get_logger

logger = get_logger(__name__)

# Relative tolerances (scaled by the largest diagonal entry / eigenvalue)
PSD_TOL = 1e-12
DET_TOL = 1e-14
ISOTROPY_TOL = 1e-12


def normalize_angle(angle: float) -> float:
    """
    Map an ellipse orientation to the canonical interval (-pi/2, pi/2].

    An ellipse is unchanged by alpha -> alpha + pi.

    Args:
        angle: Orientation in radians

    Returns:
        Equivalent orientation in (-pi/2, pi/2]
    """
    wrapped = math.fmod(angle, math.pi)
    if wrapped <= -math.pi / 2:
        wrapped += math.pi
    elif wrapped > math.pi / 2:
        wrapped -= math.pi
    return wrapped


def rotation(angle: float) -> np.ndarray:
    """Rotation matrix Theta(angle); its columns are v_mu and v_eta."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class InfoMatrix2:
    """Symmetric 2x2 information matrix [[f11, f12], [f12, f22]] in 1/m^2."""
    f11: float
    f12: float
    f22: float

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "InfoMatrix2":
        """Build from a 2x2 array, symmetrizing the off-diagonal."""
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"Expected a 2x2 matrix, got shape {m.shape}")
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    @classmethod
    def zeros(cls) -> "InfoMatrix2":
        return cls(0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.f11, self.f12], [self.f12, self.f22]])

    @property
    def trace(self) -> float:
        return self.f11 + self.f22

    @property
    def det(self) -> float:
        return self.f11 * self.f22 - self.f12 * self.f12

    @property
    def scale(self) -> float:
        """Largest diagonal magnitude, used to scale tolerances."""
        return max(abs(self.f11), abs(self.f22))

    @property
    def correlation(self) -> Optional[float]:
        """Correlation coefficient rho = f12 / sqrt(f11 f22), None if undefined."""
        denom = self.f11 * self.f22
        if denom <= 0:
            return None
        return max(-1.0, min(1.0, self.f12 / math.sqrt(denom)))

    def is_psd(self) -> bool:
        """Check the positive-semidefinite invariant within tolerance."""
        scale = max(self.scale, abs(self.f12))
        if scale == 0:
            return True
        if self.f11 < -PSD_TOL * scale or self.f22 < -PSD_TOL * scale:
            return False
        return self.det >= -PSD_TOL * scale * scale

    def scaled(self, factor: float) -> "InfoMatrix2":
        return InfoMatrix2(self.f11 * factor, self.f12 * factor, self.f22 * factor)

    def __add__(self, other: "InfoMatrix2") -> "InfoMatrix2":
        return InfoMatrix2(self.f11 + other.f11, self.f12 + other.f12, self.f22 + other.f22)

    def __sub__(self, other: "InfoMatrix2") -> "InfoMatrix2":
        return InfoMatrix2(self.f11 - other.f11, self.f12 - other.f12, self.f22 - other.f22)

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {'f11': self.f11, 'f12': self.f12, 'f22': self.f22}


@dataclass(frozen=True)
class EllipseParams:
    """
    Ellipse (mu, eta, alpha) with major >= minor >= 0.

    The angle is stored in canonical form: normalized to (-pi/2, pi/2] and
    forced to 0 when the ellipse is a circle.
    """
    major: float
    minor: float
    angle: float = 0.0

    def __post_init__(self):
        if self.minor < 0:
            raise ValueError(f"Ellipse minor eigenvalue must be >= 0, got {self.minor}")
        if self.major < self.minor:
            raise ValueError(f"Ellipse requires major >= minor, got ({self.major}, {self.minor})")
        angle = normalize_angle(self.angle)
        if self.major - self.minor <= ISOTROPY_TOL * self.major:
            angle = 0.0
        object.__setattr__(self, 'angle', angle)

    @classmethod
    def from_unordered(cls, first: float, second: float, angle: float) -> "EllipseParams":
        """Build from eigenvalues in any order; angle refers to the first one."""
        if first >= second:
            return cls(first, second, angle)
        return cls(second, first, angle + math.pi / 2)

    @property
    def is_degenerate(self) -> bool:
        """True when the minor eigenvalue vanishes (rank-1 or zero information)."""
        return self.minor <= PSD_TOL * self.major

    def to_dict(self) -> dict:
        """Convert to dictionary format."""
        return {'major': self.major, 'minor': self.minor, 'angle': self.angle}


@dataclass(frozen=True)
class ConfidenceScale:
    """Ellipse scale k and the matching probability P_e, k = -2 ln(1 - P_e)."""
    k: float
    p_e: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"Confidence scale k must be positive, got {self.k}")
        if not 0 < self.p_e < 1:
            raise ValueError(f"Probability P_e must lie in (0, 1), got {self.p_e}")
        expected = -2.0 * math.log1p(-self.p_e)
        if abs(expected - self.k) > 1e-12 * max(1.0, self.k):
            raise ValueError(f"k={self.k} does not match P_e={self.p_e} (expected k={expected})")

    @classmethod
    def from_k(cls, k: float) -> "ConfidenceScale":
        if not k > 0:
            raise DegenerateInputError(f"Confidence scale k must be positive, got {k}")
        return cls(k=k, p_e=-math.expm1(-k / 2.0))

    @classmethod
    def from_probability(cls, p_e: float) -> "ConfidenceScale":
        if not 0 < p_e < 1:
            raise DegenerateInputError(f"Probability P_e must lie in (0, 1), got {p_e}")
        return cls(k=-2.0 * math.log1p(-p_e), p_e=p_e)


def fim_to_ellipse(fim: InfoMatrix2) -> EllipseParams:
    """
    Principal-component decomposition of a 2x2 information matrix.

    Args:
        fim: Positive semidefinite information matrix

    Returns:
        EllipseParams (mu, eta, alpha)

    Raises:
        NotPSDError: If the matrix violates the PSD invariant
    """
    if not fim.is_psd():
        raise NotPSDError(f"Information matrix is not positive semidefinite: {fim.to_dict()}")

    half_trace = 0.5 * (fim.f11 + fim.f22)
    radius = math.hypot(0.5 * (fim.f11 - fim.f22), fim.f12)
    mu = max(half_trace + radius, 0.0)
    det = fim.det
    if mu > 0 and det > 0:
        # det / mu avoids cancellation in half_trace - radius
        eta = min(det / mu, mu)
    else:
        eta = 0.0

    if radius <= ISOTROPY_TOL * mu:
        alpha = 0.0
    else:
        alpha = 0.5 * math.atan2(2.0 * fim.f12, fim.f11 - fim.f22)

    return EllipseParams(mu, eta, alpha)


def ellipse_to_fim(ellipse: EllipseParams) -> InfoMatrix2:
    """
    Rebuild F = Theta(alpha) diag(mu, eta) Theta(alpha)^T.

    Args:
        ellipse: Ellipse parameters

    Returns:
        InfoMatrix2
    """
    c, s = math.cos(ellipse.angle), math.sin(ellipse.angle)
    mu, eta = ellipse.major, ellipse.minor
    return InfoMatrix2(
        f11=mu * c * c + eta * s * s,
        f12=(mu - eta) * c * s,
        f22=mu * s * s + eta * c * c,
    )


def crlb_from_fim(fim: InfoMatrix2) -> InfoMatrix2:
    """
    Invert a 2x2 FIM, i.e. Theta(pi/2) F Theta(pi/2)^T / det(F).

    Args:
        fim: Strictly positive definite information matrix

    Returns:
        CRLB matrix in m^2

    Raises:
        SingularFimError: If det(F) is not above the singularity tolerance
    """
    det = fim.det
    if det <= DET_TOL * fim.scale ** 2 or fim.f11 <= 0 or fim.f22 <= 0:
        raise SingularFimError(
            f"FIM is singular (det={det:.3e}); the node cannot be localized"
        )
    return InfoMatrix2(fim.f22 / det, -fim.f12 / det, fim.f11 / det)


def error_ellipse(fim: InfoMatrix2) -> EllipseParams:
    """
    Error Ellipse EE(1/eta, 1/mu, alpha + pi/2) of an information matrix.

    Args:
        fim: Strictly positive definite information matrix

    Returns:
        EllipseParams of the CRLB

    Raises:
        SingularFimError: If the FIM is singular
    """
    info = fim_to_ellipse(fim)
    if info.minor <= 0:
        raise SingularFimError("FIM is singular; the error ellipse is unbounded")
    return EllipseParams(1.0 / info.minor, 1.0 / info.major, info.angle + math.pi / 2)


def eccentricity(ellipse: EllipseParams) -> float:
    """Eccentricity sqrt(1 - eta/mu) in [0, 1]."""
    if ellipse.major == 0:
        raise DegenerateInputError("Eccentricity is undefined for a zero ellipse")
    return math.sqrt(max(0.0, 1.0 - ellipse.minor / ellipse.major))


def area(ellipse: EllipseParams) -> float:
    """Area pi sqrt(mu eta) of the ellipse."""
    return math.pi * math.sqrt(ellipse.major * ellipse.minor)


def peb(ellipse: EllipseParams) -> float:
    """
    Position Error Bound sqrt(1/mu + 1/eta) in meters.

    Raises:
        SingularFimError: If eta == 0
    """
    if ellipse.minor <= 0:
        raise SingularFimError("PEB is unbounded for a degenerate information ellipse")
    return math.sqrt(1.0 / ellipse.major + 1.0 / ellipse.minor)


def ellipse_contains(
    ellipse: EllipseParams,
    point: Union[np.ndarray, list, tuple],
    k: float
) -> Union[bool, np.ndarray]:
    """
    Membership test x^T F^{-1} x <= k for the ellipse F = IE(mu, eta, alpha).

    Args:
        ellipse: Nondegenerate ellipse
        point: A 2-vector, or an (m, 2) array of points
        k: Confidence scale (> 0)

    Returns:
        bool for a single point, boolean array for several points

    Raises:
        SingularFimError: If the ellipse is degenerate
    """
    if ellipse.minor <= 0:
        raise SingularFimError("Membership is undefined for a degenerate ellipse")
    if not k > 0:
        raise DegenerateInputError(f"Confidence scale k must be positive, got {k}")

    pts = np.asarray(point, dtype=float)
    c, s = math.cos(ellipse.angle), math.sin(ellipse.angle)
    u = c * pts[..., 0] + s * pts[..., 1]
    v = -s * pts[..., 0] + c * pts[..., 1]
    inside = u * u / ellipse.major + v * v / ellipse.minor <= k
    if pts.ndim == 1:
        return bool(inside)
    return inside
