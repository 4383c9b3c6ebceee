"""Replication driver and summary statistics."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pyarrow as pa
from joblib import Parallel, delayed

from hyperpark.analytics.modulation import ModulationKind, ModulationLaw
from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig
from hyperpark.sim.network import (
    NetworkKind,
    Orientation,
    StreetNetwork,
    generate_deterministic_network,
    generate_poisson_network,
)
from hyperpark.sim.search import (
    RngStream,
    SearchOutcome,
    Strategy,
    TerminalRule,
    simulate_jumpless,
    simulate_jumpover,
    simulate_modulated,
    simulate_on_network,
)

logger = logging.getLogger(__name__)

CHUNK_SIZE = 2000


@dataclass(frozen=True)
class SimulationPlan:
    """Everything a replication needs besides its stream."""

    cfg: CityConfig
    strategy: Strategy = Strategy.JUMPLESS
    law: ModulationLaw | None = None
    terminal: TerminalRule = TerminalRule.FORMULA
    network: StreetNetwork | None = None
    network_kind: NetworkKind = NetworkKind.POISSON
    turning: Strategy = Strategy.JUMPLESS

    def __post_init__(self) -> None:
        """Validate the combination of options."""
        self.cfg.finite_depth()
        modulated = self.law is not None and not (
            self.law.kind is ModulationKind.CONSTANT and self.law.first == 1.0
        )
        if modulated and self.strategy is not Strategy.JUMPLESS:
            raise DomainError("modulation is only supported for the jumpless strategy")
        if self.turning is Strategy.NETWORK:
            raise DomainError("the network turning rule must be jumpless or jumpover")


def _draw_poisson_network(cfg: CityConfig, rng: np.random.Generator) -> StreetNetwork:
    """Draw networks until the top level has a horizontal street to start from."""
    while True:
        network = generate_poisson_network(cfg, rng)
        if len(network.coordinates(Orientation.HORIZONTAL, network.k_max)) > 0:
            return network
        logger.debug("redrawing network without a level-%d horizontal street", network.k_max)


def run_replication(plan: SimulationPlan, stream: RngStream) -> SearchOutcome:
    """
    Run one replication on its own random stream.

    Parameters
    ----------
        plan: What to simulate
        stream: (master_seed, stream_id) of this replication

    Returns
    -------
        SearchOutcome: The outcome
    """
    rng = stream.generator()
    if plan.strategy is Strategy.JUMPOVER:
        return simulate_jumpover(plan.cfg, rng, plan.terminal)
    if plan.strategy is Strategy.NETWORK:
        network = plan.network
        if network is None:
            if plan.network_kind is NetworkKind.POISSON:
                network = _draw_poisson_network(plan.cfg, rng)
            else:
                network = generate_deterministic_network(plan.cfg)
        return simulate_on_network(network, None, rng, plan.turning)
    if plan.law is not None:
        return simulate_modulated(plan.cfg, plan.law, rng, plan.terminal)
    return simulate_jumpless(plan.cfg, rng, plan.terminal)


def _run_chunk(plan: SimulationPlan, master_seed: int, start: int, stop: int) -> list[SearchOutcome]:
    return [run_replication(plan, RngStream(master_seed, i)) for i in range(start, stop)]


@dataclass(frozen=True)
class MonteCarloSummary:
    """Aggregated replications in stream order."""

    reps: int
    mean: float
    variance: float
    se: float
    variance_se: float
    turn_histogram: np.ndarray = field(repr=False)
    parked_fraction: float
    exit_rate: float
    outcomes: tuple[SearchOutcome, ...] = field(repr=False)

    @property
    def second_moment(self) -> float:
        """Sample E[D^2]."""
        d = np.array([o.distance for o in self.outcomes])
        return math.fsum(d * d) / self.reps

    @property
    def turn_mean(self) -> float:
        """Mean final level, the empirical E[k_max - T]."""
        levels = np.arange(len(self.turn_histogram))
        return math.fsum(levels * self.turn_histogram) / self.reps

    @property
    def turn_se(self) -> float:
        """Standard error of turn_mean."""
        if self.reps < 2:
            return 0.0
        levels = np.array([o.final_level for o in self.outcomes], dtype=float)
        return float(np.std(levels, ddof=1)) / math.sqrt(self.reps)


def summarize(outcomes: list[SearchOutcome], depth: int) -> MonteCarloSummary:
    """
    Aggregate outcomes with compensated sums.

    Parameters
    ----------
        outcomes: Outcomes in stream order
        depth: k_max, sizing the turn histogram

    Returns
    -------
        MonteCarloSummary: Mean, variance and their standard errors
    """
    n = len(outcomes)
    if n == 0:
        raise DomainError("cannot summarize zero replications")
    d = np.array([o.distance for o in outcomes])
    mean = math.fsum(d) / n
    if n > 1:
        centered = d - mean
        variance = math.fsum(centered**2) / (n - 1)
        fourth = math.fsum(centered**4) / n
        se = math.sqrt(variance / n)
        variance_se = math.sqrt(max(fourth - variance**2, 0.0) / n)
    else:
        variance = se = variance_se = 0.0
    levels = np.array([o.final_level for o in outcomes], dtype=np.int64)
    return MonteCarloSummary(
        reps=n,
        mean=mean,
        variance=variance,
        se=se,
        variance_se=variance_se,
        turn_histogram=np.bincount(levels, minlength=depth + 1),
        parked_fraction=sum(o.parked for o in outcomes) / n,
        exit_rate=sum(o.exited for o in outcomes) / n,
        outcomes=tuple(outcomes),
    )


def monte_carlo(plan: SimulationPlan, reps: int, master_seed: int, threads: int = 1) -> MonteCarloSummary:
    """
    Run ``reps`` independent replications and aggregate them.

    Replication i always uses stream (master_seed, i), so the summary does not
    depend on ``threads``.

    Parameters
    ----------
        plan: What to simulate
        reps: Number of replications
        master_seed: Master seed
        threads: Parallel workers

    Returns
    -------
        MonteCarloSummary: Aggregated results

    Raises
    ------
        DomainError: If reps < 1
    """
    if reps < 1:
        raise DomainError(f"reps must be at least 1, got {reps}")
    if threads < 1:
        raise DomainError(f"threads must be at least 1, got {threads}")
    bounds = [(i, min(i + CHUNK_SIZE, reps)) for i in range(0, reps, CHUNK_SIZE)]
    logger.info(
        "running %d replications of %s in %d chunks on %d workers",
        reps,
        plan.strategy.value,
        len(bounds),
        threads,
    )
    chunks = Parallel(n_jobs=threads)(
        delayed(_run_chunk)(plan, master_seed, start, stop) for start, stop in bounds
    )
    outcomes = [o for chunk in chunks for o in chunk]
    summary = summarize(outcomes, plan.cfg.finite_depth())
    logger.info("mean %.6g +- %.2g over %d replications", summary.mean, summary.se, reps)
    return summary


def outcomes_table(summary: MonteCarloSummary) -> pa.Table:
    """
    Tabulate outcomes as ``rep,distance,turns,parked,levels_visited``.

    Parameters
    ----------
        summary: Aggregated replications

    Returns
    -------
        pa.Table: One row per replication; levels joined with ';'
    """
    outcomes = summary.outcomes
    return pa.table(
        {
            "rep": pa.array(range(len(outcomes)), type=pa.int64()),
            "distance": pa.array([o.distance for o in outcomes], type=pa.float64()),
            "turns": pa.array([o.turns for o in outcomes], type=pa.int64()),
            "parked": pa.array([o.parked for o in outcomes], type=pa.bool_()),
            "levels_visited": pa.array([";".join(map(str, o.level_trace)) for o in outcomes]),
        }
    )
