"""Tests for single search simulations."""

import math

import numpy as np
import pytest

from hyperpark.analytics.modulation import ModulationLaw
from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig
from hyperpark.sim.network import generate_deterministic_network
from hyperpark.sim.search import (
    RngStream,
    Strategy,
    TerminalRule,
    jump_target,
    simulate_jumpless,
    simulate_jumpover,
    simulate_modulated,
    simulate_on_network,
)


def test_streams_are_reproducible(deep_city: CityConfig) -> None:
    """Test that a stream always yields the same search."""
    first = simulate_jumpless(deep_city, RngStream(42, 7).generator())
    again = simulate_jumpless(deep_city, RngStream(42, 7).generator())
    other = simulate_jumpless(deep_city, RngStream(42, 8).generator())
    assert first == again
    assert first != other


def test_stream_validation() -> None:
    """Test that seeds must be 64-bit unsigned and ids nonnegative."""
    with pytest.raises(DomainError):
        RngStream(-1, 0)
    with pytest.raises(DomainError):
        RngStream(2**64, 0)
    with pytest.raises(DomainError):
        RngStream(0, -1)
    RngStream(2**64 - 1, 0).generator()


def test_empty_city_reaches_the_cross(rng: np.random.Generator) -> None:
    """Test that without slots every level is visited and the search ends unparked."""
    outcome = simulate_jumpless(CityConfig(lam=0.0, k_max=3), rng)
    assert not outcome.parked
    assert outcome.level_trace == (3, 2, 1, 0)
    assert outcome.turns == 3
    assert outcome.final_level == 0
    assert outcome.distance > 0.0


def test_crowded_city_parks_at_once(rng: np.random.Generator) -> None:
    """Test that a huge intensity parks on the first segment."""
    cfg = CityConfig(lam=1e12, k_max=3)
    for _ in range(50):
        outcome = simulate_jumpless(cfg, rng)
        assert outcome.parked
        assert outcome.turns == 0
        assert outcome.level_trace == (3,)


def test_jumpless_descends_one_level_at_a_time(deep_city: CityConfig, rng: np.random.Generator) -> None:
    """Test that every turn goes down exactly one level."""
    for _ in range(200):
        trace = simulate_jumpless(deep_city, rng).level_trace
        assert trace[0] == 25
        assert all(a - b == 1 for a, b in zip(trace, trace[1:]))


def test_first_segment_parking_probability() -> None:
    """Test that parking on the first segment has probability load / (1 + load)."""
    # ρ α^3 = 1 with p = 1/2, L = 1
    cfg = CityConfig(p=0.5, L=1.0, lam=2048.0, k_max=3)
    n = 4000
    parked_first = sum(simulate_jumpless(cfg, RngStream(1, i).generator()).turns == 0 for i in range(n))
    assert abs(parked_first / n - 0.5) < 4.0 * math.sqrt(0.25 / n)


def test_persist_rule() -> None:
    """Test that persisting at the cross always parks and needs slots."""
    cfg = CityConfig(lam=0.5, k_max=2)
    for i in range(100):
        assert simulate_jumpless(cfg, RngStream(0, i).generator(), TerminalRule.PERSIST).parked
    with pytest.raises(DomainError):
        simulate_jumpless(cfg.with_lambda(0.0), RngStream(0, 0).generator(), TerminalRule.PERSIST)


def test_constant_modulation_follows_jumpless(deep_city: CityConfig) -> None:
    """Test that unit weights reproduce the jumpless search draw for draw."""
    law = ModulationLaw.constant(1.0)
    for i in range(50):
        plain = simulate_jumpless(deep_city, RngStream(3, i).generator())
        modulated = simulate_modulated(deep_city, law, RngStream(3, i).generator())
        assert plain == modulated


def test_jump_target_distribution() -> None:
    """Test that level k' < k is chosen with probability 2^(k'-k), the rest going to 0."""
    gen = np.random.default_rng(99)
    assert all(jump_target(gen, 1) == 0 for _ in range(100))
    n = 20000
    counts = np.bincount([jump_target(gen, 4) for _ in range(n)], minlength=4)
    expected = np.array([1 / 8, 1 / 8, 1 / 4, 1 / 2])
    se = np.sqrt(expected * (1 - expected) / n)
    assert np.all(np.abs(counts[:4] / n - expected) < 4.0 * se)
    assert counts.sum() == n


def test_jumpover_trace_strictly_decreases(deep_city: CityConfig, rng: np.random.Generator) -> None:
    """Test that the jump-over search only moves down."""
    for _ in range(200):
        outcome = simulate_jumpover(deep_city.with_lambda(0.0), rng)
        trace = outcome.level_trace
        assert all(a > b for a, b in zip(trace, trace[1:]))
        assert trace[-1] == 0
        assert outcome.turns == len(trace) - 1


def test_network_walk_by_hand(empty_grid: CityConfig, rng: np.random.Generator) -> None:
    """Test the walk East 1/4, South 3/8, then East to the edge."""
    network = generate_deterministic_network(empty_grid)
    outcome = simulate_on_network(network, (0.0, 0.875), rng)
    assert outcome.distance == pytest.approx(11.0 / 8.0)
    assert outcome.level_trace == (2, 1, 0)
    assert outcome.turns == 2
    assert outcome.exited
    assert not outcome.parked


def test_network_jumpover_walk(empty_grid: CityConfig, rng: np.random.Generator) -> None:
    """Test that jump-over turns onto the nearest lower street of any level."""
    network = generate_deterministic_network(empty_grid)
    outcome = simulate_on_network(network, (0.0, 0.625), rng, Strategy.JUMPOVER)
    assert outcome.level_trace[:2] == (2, 1)
    # from x = 0.3 the level-0 street at 1/2 comes before the level-1 street at 3/4
    outcome = simulate_on_network(network, (0.3, 0.625), rng, Strategy.JUMPOVER)
    assert outcome.level_trace == (2, 0)
    assert outcome.distance == pytest.approx(0.2 + 0.625)


def test_network_start_must_be_on_top_street(empty_grid: CityConfig, rng: np.random.Generator) -> None:
    """Test that an off-street start is rejected."""
    network = generate_deterministic_network(empty_grid)
    with pytest.raises(DomainError):
        simulate_on_network(network, (0.0, 0.5), rng)


def test_random_start_walk_parks(rng: np.random.Generator) -> None:
    """Test that a busy network parks before leaving the square."""
    network = generate_deterministic_network(CityConfig(lam=1e9, k_max=4))
    outcome = simulate_on_network(network, None, rng)
    assert outcome.parked
    assert not outcome.exited
