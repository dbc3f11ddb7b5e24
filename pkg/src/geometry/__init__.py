"""2x2 information matrices, Information/Error Ellipses and their algebra."""

from .algebra import CombineSign, ExtremalObjective, combine, combined_peb, extremal_angle
from .ellipse import (
    ConfidenceScale,
    EllipseParams,
    InfoMatrix2,
    area,
    crlb_from_fim,
    eccentricity,
    ellipse_contains,
    ellipse_to_fim,
    error_ellipse,
    fim_to_ellipse,
    normalize_angle,
    peb,
)

__all__ = [
    'CombineSign',
    'ConfidenceScale',
    'EllipseParams',
    'ExtremalObjective',
    'InfoMatrix2',
    'area',
    'combine',
    'combined_peb',
    'crlb_from_fim',
    'eccentricity',
    'ellipse_contains',
    'ellipse_to_fim',
    'error_ellipse',
    'extremal_angle',
    'fim_to_ellipse',
    'normalize_angle',
    'peb',
]
