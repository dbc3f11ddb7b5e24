"""Test the path-loss model and the single-source FIM with known anchors."""

import math

import numpy as np
import pytest

from src.geometry.ellipse import area, eccentricity, fim_to_ellipse
from src.propagation.rss_model import (
    LN10,
    Anchor,
    PropagationModel,
    circle_scenario_ie,
    degenerate_geometry,
    equal_spacing_cosine_sum,
    lambda_coeff,
    mean_rss,
    source_fim,
    source_geometry,
    source_ie_closed_form,
)
from src.scenario.presets import DEFAULT_MODEL, triangle_aligned, triangle_equilateral
from src.utils.errors import BelowReferenceDistanceError
from src.verification.oracles import eigh_ellipse


def _circle_anchors(n: int, d: float, phi1: float = 0.0):
    return [
        Anchor(f"a{i + 1}", d * math.cos(phi1 + 2 * math.pi * i / n), d * math.sin(phi1 + 2 * math.pi * i / n))
        for i in range(n)
    ]


def test_model_validation():
    with pytest.raises(ValueError, match="gamma"):
        PropagationModel(gamma=0.0)
    with pytest.raises(ValueError, match="sigma"):
        PropagationModel(sigma=-1.0)
    with pytest.raises(ValueError, match="d0"):
        PropagationModel(d0=0.0)


def test_mean_rss():
    model = PropagationModel(p0=-40.0, gamma=2.0, d0=1.0, sigma=4.0)
    assert mean_rss(model, 1.0) == pytest.approx(-40.0)
    assert mean_rss(model, 10.0) == pytest.approx(-60.0)
    assert np.allclose(mean_rss(model, np.array([1.0, 100.0])), [-40.0, -80.0])


def test_lambda_coefficient():
    """lambda = (10 gamma / (sigma ln10 d))^2."""
    lam = lambda_coeff(DEFAULT_MODEL, 5.0)
    assert lam == pytest.approx((35.0 / (5.0 * LN10 * 5.0)) ** 2, rel=1e-14)
    assert lambda_coeff(DEFAULT_MODEL, 10.0) == pytest.approx(lam / 4.0)


def test_below_reference_distance_names_pair():
    model = PropagationModel(d0=2.0)
    with pytest.raises(BelowReferenceDistanceError, match="source 's1' and anchor 'a2'"):
        source_geometry([Anchor("a1", 5.0, 0.0), Anchor("a2", 1.0, 0.0)], [0.0, 0.0], model, "s1")
    with pytest.raises(BelowReferenceDistanceError):
        lambda_coeff(model, 1.0)


def test_bearings_point_from_source_to_anchor():
    geometry = source_geometry([Anchor("a1", 0.0, 5.0), Anchor("a2", -3.0, 0.0)], [0.0, 1.0], DEFAULT_MODEL)
    assert geometry.bearings[0] == pytest.approx(math.pi / 2)
    assert geometry.bearings[1] == pytest.approx(math.atan2(-1.0, -3.0))
    assert geometry.distances[0] == pytest.approx(4.0)


@pytest.mark.parametrize("n", [3, 8, 16, 64])
def test_circle_closed_form(n):
    """Source at the centre of n equally spaced anchors: mu = eta = n lambda / 2."""
    d = 5.0
    lam = lambda_coeff(DEFAULT_MODEL, d)
    expected = n * lam / 2

    closed = circle_scenario_ie(n, d, DEFAULT_MODEL)
    assert closed.major == pytest.approx(expected, rel=1e-12)
    assert closed.minor == pytest.approx(expected, rel=1e-12)

    numeric = fim_to_ellipse(source_fim(_circle_anchors(n, d, 0.3), [0.0, 0.0], DEFAULT_MODEL))
    assert numeric.major == pytest.approx(expected, rel=1e-12)
    assert numeric.minor == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n", [3, 4, 7, 16, 64])
def test_equal_spacing_cosine_sum(n):
    for phi1 in (0.0, 0.4, math.pi / n):
        assert equal_spacing_cosine_sum(n, phi1) == pytest.approx(-n / 2, abs=1e-9)


def test_triangle_comparison():
    """Equilateral triangle beats the triangle with two aligned anchors."""
    lam = lambda_coeff(DEFAULT_MODEL, 3.0)

    aligned = triangle_aligned()
    geometry1 = fim_to_ellipse(source_fim(aligned.anchors, [0.0, 0.0], aligned.model))
    assert geometry1.major == pytest.approx((3 + math.sqrt(3)) * lam / 2, rel=1e-10)
    assert geometry1.minor == pytest.approx((3 - math.sqrt(3)) * lam / 2, rel=1e-10)
    area1 = area(geometry1)
    assert area1 == pytest.approx(math.pi * lam * math.sqrt(6) / 2, rel=1e-10)

    equilateral = triangle_equilateral()
    geometry2 = fim_to_ellipse(source_fim(equilateral.anchors, [0.0, 0.0], equilateral.model))
    assert geometry2.major == pytest.approx(3 * lam / 2, rel=1e-10)
    assert geometry2.minor == pytest.approx(3 * lam / 2, rel=1e-10)
    area2 = area(geometry2)
    assert area2 == pytest.approx(3 * math.pi * lam / 2, rel=1e-10)
    assert area2 > area1


def test_closed_form_matches_matrix_sum(rng):
    """Double-sum IE closed form equals the eigendecomposition of sum lambda R."""
    for _ in range(10000):
        n = int(rng.integers(2, 12))
        lambdas = rng.uniform(0.01, 2.0, size=n)
        phis = rng.uniform(-math.pi, math.pi, size=n)
        q = np.column_stack([np.cos(phis), np.sin(phis)])
        matrix = (q * lambdas[:, None]).T @ q
        eigenvalues = np.linalg.eigvalsh(matrix)

        closed = source_ie_closed_form(lambdas, phis)
        assert abs(closed.major - eigenvalues[1]) <= 1e-9 * eigenvalues[1]
        assert abs(closed.minor - eigenvalues[0]) <= 1e-9 * eigenvalues[1]
        if eigenvalues[1] - eigenvalues[0] > 1e-3 * eigenvalues[1]:
            numeric = eigh_ellipse(matrix)
            delta = closed.angle - numeric.angle
            assert abs(math.sin(2 * delta)) < 1e-7


def test_degenerate_geometry_flag():
    collinear = [Anchor("a1", 5.0, 0.0), Anchor("a2", -4.0, 0.0), Anchor("a3", 9.0, 0.0)]
    geometry = source_geometry(collinear, [0.0, 0.0], DEFAULT_MODEL)
    assert degenerate_geometry(geometry.bearings)
    fim = source_fim(collinear, [0.0, 0.0], DEFAULT_MODEL)
    assert fim_to_ellipse(fim).is_degenerate

    spread = source_geometry(_circle_anchors(3, 5.0), [0.0, 0.0], DEFAULT_MODEL)
    assert not degenerate_geometry(spread.bearings)


def test_eccentricity_grows_as_source_nears_ring():
    """Moving the source from the centre toward the ring makes the IE more eccentric."""
    anchors = _circle_anchors(16, 5.0)
    values = [eccentricity(fim_to_ellipse(source_fim(anchors, [x, 0.0], DEFAULT_MODEL))) for x in (0.0, 1.0, 2.0, 3.0)]
    assert values[0] == pytest.approx(0.0, abs=1e-6)
    assert all(b > a for a, b in zip(values, values[1:]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
