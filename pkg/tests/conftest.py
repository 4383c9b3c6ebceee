"""Pytest configuration and shared fixtures."""

from pathlib import Path

import numpy as np
import pytest

from hyperpark.model.config import CityConfig
from hyperpark.sim.network import generate_deterministic_network, write_network


@pytest.fixture
def deep_city() -> CityConfig:
    """
    Create the reference city used for simulation.

    Returns:
        CityConfig: p = 1/2, L = 1, λ = 100, k_max = 25
    """
    return CityConfig(p=0.5, L=1.0, lam=100.0, k_max=25)


@pytest.fixture
def infinite_city() -> CityConfig:
    """
    Create an infinitely deep city.

    Returns:
        CityConfig: p = 1/2, L = 1, λ = 100, k_max = inf
    """
    return CityConfig(p=0.5, L=1.0, lam=100.0, k_max=None)


@pytest.fixture
def empty_grid() -> CityConfig:
    """
    Create a two-level city without any free slot.

    Returns:
        CityConfig: k_max = 2, λ = 0
    """
    return CityConfig(p=0.5, L=1.0, lam=0.0, k_max=2)


@pytest.fixture
def rng() -> np.random.Generator:
    """
    Create a seeded generator.

    Returns:
        np.random.Generator: PCG64 seeded with 12345
    """
    return np.random.default_rng(12345)


@pytest.fixture
def network_file(tmp_path: Path) -> Path:
    """
    Create a deterministic network file.

    Returns:
        Path: Network with k_max = 3 and λ = 50
    """
    path = tmp_path / "grid.txt"
    write_network(generate_deterministic_network(CityConfig(p=0.5, L=1.0, lam=50.0, k_max=3)), path)
    return path


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    """
    Create a flat configuration file.

    Returns:
        Path: File setting L = 2, λ = 0 and k_max = 10
    """
    path = tmp_path / "city.conf"
    path.write_text("# reference city\nL = 2\nlambda = 0   # empty streets\nk_max: 10\n")
    return path
