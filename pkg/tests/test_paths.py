"""Tests for distance moments along segment paths."""

import math

import numpy as np
import pytest
from scipy import integrate

from hyperpark.analytics.harmonic import mean_distance_analytic, second_moment_analytic
from hyperpark.analytics.paths import (
    SegmentPath,
    laplace_recursive,
    laplace_transform_distance,
    level_path,
    mean_distance_exponential,
    mean_distance_fixed_path,
    mean_distance_recursive,
    second_moment_exponential,
    second_moment_fixed_path,
)
from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig


def _random_path(rng: np.random.Generator, size: int) -> SegmentPath:
    lam = rng.exponential(3.0, size)
    lam[rng.random(size) < 0.2] = 0.0
    return SegmentPath.fixed(lam, rng.uniform(0.05, 2.0, size))


def test_single_segment_mean() -> None:
    """Test that one unit segment at unit intensity gives 1 - 1/e."""
    path = SegmentPath.fixed([1.0], [1.0])
    assert mean_distance_fixed_path(path) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-14)


def test_zero_intensity_drives_whole_path() -> None:
    """Test that empty streets are driven in full."""
    path = SegmentPath.fixed([0.0, 0.0, 0.0], [0.5, 0.25, 1.0])
    assert mean_distance_fixed_path(path) == pytest.approx(1.75, rel=1e-15)
    assert second_moment_fixed_path(path) == pytest.approx(1.75**2, rel=1e-14)


def test_mean_recursion_identity(rng: np.random.Generator) -> None:
    """Test that the closed sum and the one-step recursion agree."""
    for _ in range(1000):
        path = _random_path(rng, int(rng.integers(1, 12)))
        first = path.spans[0] * (
            -math.expm1(-path.intensities[0] * path.spans[0]) / (path.intensities[0] * path.spans[0])
            if path.intensities[0] > 0
            else 1.0
        )
        expected = first
        if len(path) > 1:
            expected += math.exp(-path.intensities[0] * path.spans[0]) * mean_distance_fixed_path(path.tail())
        assert mean_distance_fixed_path(path) == pytest.approx(expected, rel=1e-12)
        assert mean_distance_recursive(path) == pytest.approx(mean_distance_fixed_path(path), rel=1e-12)


def test_mean_against_event_simulation() -> None:
    """Test the two-segment mean against a direct simulation of pop-ups."""
    lam = np.array([2.0, 5.0])
    length = np.array([0.3, 0.4])
    gen = np.random.default_rng(7)
    n = 200_000
    first = gen.exponential(1.0 / lam[0], n)
    second = gen.exponential(1.0 / lam[1], n)
    distance = np.where(
        first <= length[0],
        first,
        np.where(second <= length[1], length[0] + second, length.sum()),
    )
    se = distance.std(ddof=1) / math.sqrt(n)
    path = SegmentPath.fixed(lam, length)
    assert abs(distance.mean() - mean_distance_fixed_path(path)) < 4 * se
    second_se = (distance**2).std(ddof=1) / math.sqrt(n)
    assert abs((distance**2).mean() - second_moment_fixed_path(path)) < 4 * second_se


def test_single_segment_second_moment() -> None:
    """Test E[D^2] on one segment and its long-segment limit 2/λ^2."""
    assert second_moment_fixed_path(SegmentPath.fixed([1.0], [1.0])) == pytest.approx(
        2.0 * (1.0 - 2.0 * math.exp(-1.0)), rel=1e-13
    )
    assert second_moment_fixed_path(SegmentPath.fixed([1.0], [60.0])) == pytest.approx(2.0, rel=1e-12)


def test_tiny_loads_stay_accurate() -> None:
    """Test that the small-load series matches the exact value near zero load."""
    y = 1e-6
    path = SegmentPath.fixed([y], [1.0])
    # 2 (1 - e^-y (1 + y)) / y^2 expanded in y
    expected = 1.0 - 2.0 * y / 3.0 + y**2 / 4.0
    assert second_moment_fixed_path(path) == pytest.approx(expected, rel=1e-12)
    assert mean_distance_fixed_path(path) == pytest.approx(1.0 - y / 2.0, rel=1e-12)


def test_exponential_path_mean() -> None:
    """Test exponential-length means in closed form."""
    assert mean_distance_exponential(SegmentPath.exponential([1.0], [1.0])) == pytest.approx(0.5)
    assert mean_distance_exponential(SegmentPath.exponential([0.0], [4.0])) == pytest.approx(0.25)
    assert mean_distance_exponential(SegmentPath.exponential([1.0, 3.0], [1.0, 1.0])) == pytest.approx(0.625)


def test_exponential_mean_averages_fixed_mean() -> None:
    """Test that averaging the fixed-path mean over exponential lengths gives the exponential mean."""

    def integrand(s2: float, s1: float) -> float:
        path = SegmentPath.fixed([1.0, 3.0], [max(s1, 1e-300), max(s2, 1e-300)])
        return mean_distance_fixed_path(path) * math.exp(-s1 - s2)

    value, _ = integrate.dblquad(integrand, 0.0, np.inf, 0.0, np.inf, epsabs=1e-11, epsrel=1e-10)
    assert value == pytest.approx(0.625, rel=1e-7)


def test_exponential_second_moment() -> None:
    """Test exponential-length second moments in closed form."""
    # one segment: D ~ Exp(λ + α)
    assert second_moment_exponential(SegmentPath.exponential([1.0], [1.0])) == pytest.approx(0.5)
    # no slots: D is a sum of independent exponentials
    expected = 2.0 / 4.0 + 2.0 / 1.0 + 2.0 * (1.0 / 2.0) * 1.0
    assert second_moment_exponential(SegmentPath.exponential([0.0, 0.0], [2.0, 1.0])) == pytest.approx(expected)


def test_level_path_matches_city_mean(deep_city: CityConfig) -> None:
    """Test that the jumpless level path reproduces the finite-city moments."""
    path = level_path(deep_city)
    assert len(path) == deep_city.k_max
    assert mean_distance_exponential(path) == pytest.approx(mean_distance_analytic(deep_city).value, rel=1e-12)
    assert second_moment_exponential(path) == pytest.approx(second_moment_analytic(deep_city).value, rel=1e-12)


def test_level_path_needs_a_segment() -> None:
    """Test that k_max = 0 leaves nothing to drive."""
    with pytest.raises(DomainError):
        level_path(CityConfig(k_max=0))


def test_laplace_at_zero(rng: np.random.Generator) -> None:
    """Test that the transform is 1 at s = 0."""
    path = _random_path(rng, 6)
    assert laplace_transform_distance(path, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_laplace_recursion_identity(rng: np.random.Generator) -> None:
    """Test that the closed sum and the recursion agree on the right half-plane."""
    for _ in range(1000):
        path = _random_path(rng, int(rng.integers(1, 12)))
        s = complex(rng.uniform(0.0, 5.0), rng.uniform(-5.0, 5.0))
        assert laplace_transform_distance(path, s) == pytest.approx(laplace_recursive(path, s), rel=1e-12, abs=1e-15)


def test_laplace_moments_from_imaginary_axis() -> None:
    """Test that finite differences along ±ih recover the first two moments."""
    path = SegmentPath.fixed([0.5, 2.0, 0.0, 4.0], [0.7, 0.2, 0.3, 0.9])
    h = 1e-4
    plus = laplace_transform_distance(path, 1j * h)
    minus = laplace_transform_distance(path, -1j * h)
    mean = -((plus - minus) / (2j * h)).real
    assert mean == pytest.approx(mean_distance_fixed_path(path), rel=1e-6)

    h = 1e-3
    plus = laplace_transform_distance(path, 1j * h)
    minus = laplace_transform_distance(path, -1j * h)
    second = ((plus - 2.0 + minus) / (1j * h) ** 2).real
    assert second == pytest.approx(second_moment_fixed_path(path), rel=1e-4)


def test_laplace_left_half_plane() -> None:
    """Test that Re(s) < 0 is rejected."""
    with pytest.raises(DomainError):
        laplace_transform_distance(SegmentPath.fixed([1.0], [1.0]), -0.1)


def test_path_validation() -> None:
    """Test malformed paths and mismatched kinds."""
    with pytest.raises(DomainError):
        SegmentPath.fixed([], [])
    with pytest.raises(DomainError):
        SegmentPath.fixed([1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        SegmentPath.fixed([-1.0], [1.0])
    with pytest.raises(DomainError):
        SegmentPath.fixed([1.0], [0.0])
    with pytest.raises(DomainError):
        mean_distance_fixed_path(SegmentPath.exponential([1.0], [1.0]))
    with pytest.raises(DomainError):
        mean_distance_exponential(SegmentPath.fixed([1.0], [1.0]))
