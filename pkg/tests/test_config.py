"""Tests for the city configuration."""

import math
from pathlib import Path

import numpy as np
import pytest

from hyperpark.errors import ConfigError, DomainError
from hyperpark.model.config import (
    CityConfig,
    GeneralizedScaling,
    derived_rates,
    generalized_dimension,
    hyperfractal_dimension,
    level_density,
    load_config_file,
    mass_closure,
    parse_depth,
    street_count,
    truncation_depth,
)


def test_dimension_of_the_reference_city() -> None:
    """Test that p = 1/2 gives dimension 3 and α = 1/8."""
    cfg = CityConfig(p=0.5)
    assert hyperfractal_dimension(0.5) == pytest.approx(3.0)
    assert cfg.alpha == 0.125
    assert cfg.period == pytest.approx(math.log(8.0))
    assert generalized_dimension(GeneralizedScaling(s=0.5, r=0.125)) == pytest.approx(3.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"p": 0.0},
        {"p": 1.0},
        {"L": 0.0},
        {"L": math.inf},
        {"L": math.nan},
        {"lam": -1.0},
        {"lam": math.inf},
        {"k_max": -1},
    ],
)
def test_invalid_parameters(kwargs: dict[str, float]) -> None:
    """Test that out-of-range parameters raise DomainError."""
    with pytest.raises(DomainError):
        CityConfig(**kwargs)


def test_domain_error_is_value_error() -> None:
    """Test that DomainError can be caught as ValueError."""
    with pytest.raises(ValueError):
        CityConfig(p=2.0)


def test_level_densities() -> None:
    """Test per-level densities and street counts."""
    cfg = CityConfig(p=0.5)
    assert level_density(cfg, 0) == 0.25
    assert level_density(cfg, 2) == pytest.approx(0.25 / 16)
    assert street_count(0) == 2
    assert street_count(1) == 4
    assert street_count(2) == 8


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_mass_closure(p: float) -> None:
    """Test that levels 0..d carry mass 1 - q^(d+1)."""
    cfg = CityConfig(p=p)
    for depth in (0, 3, 20):
        assert mass_closure(cfg, depth) == pytest.approx(1.0 - cfg.q ** (depth + 1), rel=1e-12)
    assert mass_closure(cfg, 400) == pytest.approx(1.0, rel=1e-12)


def test_per_segment_load() -> None:
    """Test that the level-k load equals ρ α^k."""
    cfg = CityConfig(p=0.3, L=2.0, lam=40.0, k_max=10)
    rates = derived_rates(cfg)
    k = np.arange(11)
    np.testing.assert_allclose(rates.per_segment_load(), cfg.rho * cfg.alpha**k, rtol=1e-13)
    np.testing.assert_allclose(rates.mean_length, 2.0 / 2.0**k)
    assert rates.depth == 10


def test_derived_rates_need_finite_depth() -> None:
    """Test that an infinite city needs an explicit depth."""
    cfg = CityConfig(lam=1.0)
    with pytest.raises(DomainError):
        derived_rates(cfg)
    assert derived_rates(cfg, 5).depth == 5


def test_truncation_depth() -> None:
    """Test that the adaptive depth grows with λ and shrinking eps."""
    cfg = CityConfig(lam=1.0)
    assert truncation_depth(cfg, 1e-12) >= 40
    assert truncation_depth(cfg, 1e-6) < truncation_depth(cfg, 1e-12)
    assert truncation_depth(cfg, 1e-3) == 10
    with pytest.raises(DomainError):
        truncation_depth(cfg, 0.0)


def test_truncation_depth_follows_the_load() -> None:
    """Test the smallest depth whose product tail ρ α^(K+1) / (1 - α) is within eps."""
    eps = 1e-3
    cfg = CityConfig(p=0.5, lam=1e12)

    def tail(k: int) -> float:
        return cfg.rho * cfg.alpha ** (k + 1) / (1.0 - cfg.alpha)

    depth = truncation_depth(cfg, eps)
    assert depth == 16
    assert depth > truncation_depth(cfg.with_lambda(1.0), eps)
    assert tail(depth) <= eps
    assert tail(depth - 1) > eps


def test_load_config_file(config_file: Path) -> None:
    """Test that comments are ignored and both separators are accepted."""
    values = load_config_file(config_file)
    assert values == {"L": "2", "lambda": "0", "k_max": "10"}


def test_config_unknown_key(tmp_path: Path) -> None:
    """Test that an unknown key reports its line number."""
    path = tmp_path / "bad.conf"
    path.write_text("p = 0.5\nspeed = 3\n")
    with pytest.raises(ConfigError, match="line 2"):
        load_config_file(path)


def test_config_malformed_line(tmp_path: Path) -> None:
    """Test that a line without a separator is rejected."""
    path = tmp_path / "bad.conf"
    path.write_text("p 0.5\n")
    with pytest.raises(ConfigError):
        load_config_file(path)


def test_config_missing_file(tmp_path: Path) -> None:
    """Test that a missing file raises FileNotFoundError."""
    with pytest.raises(FileNotFoundError, match="Config file not found"):
        load_config_file(tmp_path / "missing.conf")


def test_parse_depth() -> None:
    """Test k_max parsing."""
    assert parse_depth("inf") is None
    assert parse_depth("Infinite") is None
    assert parse_depth("12") == 12
    assert parse_depth(7) == 7
    with pytest.raises(DomainError):
        parse_depth("deep")
