"""Tests for the replication driver."""

import numpy as np
import pytest

from hyperpark.analytics.harmonic import (
    jumpover_mean_distance,
    mean_distance_analytic,
    mean_turn_deficit,
    variance_analytic,
)
from hyperpark.analytics.modulation import ModulationLaw, modulated_mean_distance
from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig
from hyperpark.sim.montecarlo import (
    CHUNK_SIZE,
    SimulationPlan,
    monte_carlo,
    outcomes_table,
    run_replication,
    summarize,
)
from hyperpark.sim.network import NetworkKind
from hyperpark.sim.search import RngStream, Strategy


def test_single_replication_summary(deep_city: CityConfig) -> None:
    """Test that one replication has zero spread."""
    summary = monte_carlo(SimulationPlan(deep_city), reps=1, master_seed=5)
    outcome = run_replication(SimulationPlan(deep_city), RngStream(5, 0))
    assert summary.reps == 1
    assert summary.mean == outcome.distance
    assert summary.variance == 0.0
    assert summary.se == 0.0
    assert summary.turn_se == 0.0


def test_summary_needs_outcomes() -> None:
    """Test that zero replications are refused."""
    with pytest.raises(DomainError):
        summarize([], 3)
    with pytest.raises(DomainError):
        monte_carlo(SimulationPlan(CityConfig(k_max=3)), reps=0, master_seed=0)


def test_plan_validation(deep_city: CityConfig) -> None:
    """Test the supported option combinations."""
    with pytest.raises(DomainError):
        SimulationPlan(CityConfig())
    with pytest.raises(DomainError):
        SimulationPlan(deep_city, strategy=Strategy.JUMPOVER, law=ModulationLaw.gamma(0.5))
    with pytest.raises(DomainError):
        SimulationPlan(deep_city, strategy=Strategy.NETWORK, turning=Strategy.NETWORK)
    SimulationPlan(deep_city, strategy=Strategy.JUMPOVER, law=ModulationLaw.constant(1.0))


def test_results_do_not_depend_on_workers(deep_city: CityConfig) -> None:
    """Test that one and two workers produce identical outcomes."""
    plan = SimulationPlan(deep_city)
    reps = CHUNK_SIZE + 500
    serial = monte_carlo(plan, reps, master_seed=17, threads=1)
    parallel = monte_carlo(plan, reps, master_seed=17, threads=2)
    assert serial.outcomes == parallel.outcomes
    assert serial.mean == parallel.mean


@pytest.mark.slow
def test_jumpless_mean_and_variance(deep_city: CityConfig) -> None:
    """Test simulated moments against the analytic ones."""
    summary = monte_carlo(SimulationPlan(deep_city), reps=20000, master_seed=1)
    assert abs(summary.mean - mean_distance_analytic(deep_city).value) < 4.0 * summary.se
    assert abs(summary.variance - variance_analytic(deep_city).value) < 4.0 * summary.variance_se


def test_final_level_mean(deep_city: CityConfig) -> None:
    """Test the mean final level against the deep-city deficit."""
    summary = monte_carlo(SimulationPlan(deep_city), reps=10000, master_seed=2)
    expected = mean_turn_deficit(deep_city.rho, deep_city.alpha).value
    assert abs(summary.turn_mean - expected) < 4.0 * summary.turn_se
    assert summary.turn_histogram.sum() == 10000


@pytest.mark.slow
def test_jumpover_mean(deep_city: CityConfig) -> None:
    """Test the jump-over simulation against its first-step analysis."""
    plan = SimulationPlan(deep_city, strategy=Strategy.JUMPOVER)
    summary = monte_carlo(plan, reps=20000, master_seed=3)
    assert abs(summary.mean - jumpover_mean_distance(deep_city).value) < 4.0 * summary.se


@pytest.mark.slow
def test_modulated_mean() -> None:
    """Test gamma-modulated searches against the modulated mean."""
    cfg = CityConfig(p=0.5, L=1.0, lam=100.0, k_max=15)
    law = ModulationLaw.gamma(0.5, 2.0)
    summary = monte_carlo(SimulationPlan(cfg, law=law), reps=20000, master_seed=4)
    assert abs(summary.mean - modulated_mean_distance(cfg, law).value) < 4.0 * summary.se


@pytest.mark.slow
def test_poisson_network_matches_doubled_length() -> None:
    """Test that Poisson networks behave like the segment model with L = 2."""
    cfg = CityConfig(p=0.5, L=1.0, lam=1e5, k_max=12)
    plan = SimulationPlan(cfg, strategy=Strategy.NETWORK, network_kind=NetworkKind.POISSON)
    summary = monte_carlo(plan, reps=1000, master_seed=6)
    expected = mean_distance_analytic(CityConfig(p=0.5, L=2.0, lam=1e5, k_max=12)).value
    assert abs(summary.mean - expected) < 0.05 * expected + 4.0 * summary.se
    assert summary.exit_rate < 0.01


def test_shallow_poisson_networks_always_start() -> None:
    """Test that a draw without a top-level street is redrawn, not fatal."""
    cfg = CityConfig(p=0.5, L=1.0, lam=50.0, k_max=2)
    plan = SimulationPlan(cfg, strategy=Strategy.NETWORK, network_kind=NetworkKind.POISSON)
    summary = monte_carlo(plan, reps=600, master_seed=11)
    assert summary.reps == 600
    assert all(o.level_trace[0] == 2 for o in summary.outcomes)
    assert monte_carlo(plan, reps=600, master_seed=11).outcomes == summary.outcomes


def test_deterministic_network_runs() -> None:
    """Test replications on the dyadic grid."""
    cfg = CityConfig(p=0.5, L=1.0, lam=50.0, k_max=6)
    plan = SimulationPlan(cfg, strategy=Strategy.NETWORK, network_kind=NetworkKind.DETERMINISTIC)
    summary = monte_carlo(plan, reps=200, master_seed=8)
    assert summary.reps == 200
    assert 0.0 <= summary.parked_fraction <= 1.0
    assert summary.parked_fraction + summary.exit_rate == pytest.approx(1.0)


def test_outcomes_table(empty_grid: CityConfig) -> None:
    """Test one row per replication with joined level traces."""
    summary = monte_carlo(SimulationPlan(empty_grid), reps=3, master_seed=0)
    table = outcomes_table(summary)
    assert table.column_names == ["rep", "distance", "turns", "parked", "levels_visited"]
    assert table.column("rep").to_pylist() == [0, 1, 2]
    assert table.column("levels_visited").to_pylist() == ["2;1;0"] * 3
    assert not any(table.column("parked").to_pylist())
    np.testing.assert_allclose(table.column("distance").to_numpy(), [o.distance for o in summary.outcomes])
