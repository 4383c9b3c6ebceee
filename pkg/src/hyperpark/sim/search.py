"""Event-level simulation of one parking search."""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from hyperpark.analytics.modulation import ModulationLaw
from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig, derived_rates
from hyperpark.sim.network import Orientation, StreetNetwork


class TerminalRule(str, Enum):
    """What happens when no slot turns up before the central cross."""

    # stop on arrival at level 0, unparked
    FORMULA = "formula"
    # keep driving along level 0 until a slot appears
    PERSIST = "persist"


class Strategy(str, Enum):
    """Search strategy."""

    JUMPLESS = "jumpless"
    JUMPOVER = "jumpover"
    NETWORK = "network"


@dataclass(frozen=True)
class RngStream:
    """
    Identity of one replication's random stream.

    The generator depends only on (master_seed, stream_id), never on the order
    in which replications run.
    """

    master_seed: int
    stream_id: int

    def __post_init__(self) -> None:
        """Validate the seed."""
        if not 0 <= self.master_seed < 2**64:
            raise DomainError(f"master seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.stream_id < 0:
            raise DomainError(f"stream id must be nonnegative, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        """
        Create the stream's generator.

        Returns
        -------
            np.random.Generator: PCG64 generator spawned from the master seed
        """
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class SearchOutcome:
    """Result of one search."""

    distance: float
    turns: int
    parked: bool
    level_trace: tuple[int, ...]
    exited: bool = False

    @property
    def final_level(self) -> int:
        """Level the search ended on, k_max - T for the jumpless strategy."""
        return self.level_trace[-1]


def _first_slot(rng: np.random.Generator, intensity: float) -> float:
    """Distance to the first pop-up; always consumes one draw."""
    draw = rng.standard_exponential()
    return draw / intensity if intensity > 0.0 else math.inf


def _terminal(
    rng: np.random.Generator,
    terminal: TerminalRule,
    distance: float,
    trace: list[int],
    level0_intensity: float,
) -> SearchOutcome:
    turns = len(trace) - 1
    if terminal is TerminalRule.FORMULA:
        return SearchOutcome(distance, turns, False, tuple(trace))
    return SearchOutcome(distance + _first_slot(rng, level0_intensity), turns, True, tuple(trace))


def _check_persist(cfg: CityConfig, terminal: TerminalRule) -> None:
    if terminal is TerminalRule.PERSIST and cfg.lam == 0.0:
        raise DomainError("the persist rule never ends with lambda = 0")


def _descend(
    cfg: CityConfig,
    rng: np.random.Generator,
    terminal: TerminalRule,
    intensities: np.ndarray,
) -> SearchOutcome:
    depth = cfg.finite_depth()
    mean_length = cfg.L / 2.0 ** np.arange(depth + 1)
    distance = 0.0
    trace = [depth]
    for k in range(depth, 0, -1):
        segment = rng.exponential(mean_length[k])
        slot = _first_slot(rng, intensities[k])
        if slot <= segment:
            return SearchOutcome(distance + slot, depth - k, True, tuple(trace))
        distance += segment
        trace.append(k - 1)
    return _terminal(rng, terminal, distance, trace, intensities[0])


def simulate_jumpless(
    cfg: CityConfig, rng: np.random.Generator, terminal: TerminalRule = TerminalRule.FORMULA
) -> SearchOutcome:
    """
    Simulate the search that descends exactly one level per turn.

    Level k contributes an Exp(mean L/2^k) segment and an Exp(λ_k) distance to
    the first free slot; the car parks on the first segment whose slot comes
    before its end.

    Parameters
    ----------
        cfg: City configuration with finite k_max
        rng: Generator to draw from
        terminal: Rule applied on reaching the central cross

    Returns
    -------
        SearchOutcome: Distance, turns and visited levels
    """
    _check_persist(cfg, terminal)
    rates = derived_rates(cfg)
    return _descend(cfg, rng, terminal, rates.lambda_k)


def simulate_modulated(
    cfg: CityConfig,
    law: ModulationLaw,
    rng: np.random.Generator,
    terminal: TerminalRule = TerminalRule.FORMULA,
) -> SearchOutcome:
    """
    Jumpless search with one fresh weight W_k per level multiplying λ_k.

    The constant law draws nothing, so it follows the jumpless draws exactly.

    Parameters
    ----------
        cfg: City configuration with finite k_max
        law: Weight law
        rng: Generator to draw from
        terminal: Rule applied on reaching the central cross

    Returns
    -------
        SearchOutcome: Distance, turns and visited levels
    """
    _check_persist(cfg, terminal)
    rates = derived_rates(cfg)
    weights = law.sample(rng, rates.depth + 1)
    return _descend(cfg, rng, terminal, rates.lambda_k * weights)


def jump_target(rng: np.random.Generator, level: int) -> int:
    """
    Draw the next level below ``level``.

    Level k' in 1..k-1 has probability 2^(k'-k); level 0 takes the rest, 2^(1-k).

    Parameters
    ----------
        rng: Generator to draw from
        level: Current level, at least 1

    Returns
    -------
        int: Next level
    """
    return max(0, level - int(rng.geometric(0.5)))


def simulate_jumpover(
    cfg: CityConfig, rng: np.random.Generator, terminal: TerminalRule = TerminalRule.FORMULA
) -> SearchOutcome:
    """
    Simulate the search that may skip levels at each turn.

    Parameters
    ----------
        cfg: City configuration with finite k_max
        rng: Generator to draw from
        terminal: Rule applied on reaching the central cross

    Returns
    -------
        SearchOutcome: Distance, turns and visited levels
    """
    _check_persist(cfg, terminal)
    rates = derived_rates(cfg)
    level = rates.depth
    distance = 0.0
    trace = [level]
    while level > 0:
        segment = rng.exponential(cfg.L / 2.0**level)
        slot = _first_slot(rng, rates.lambda_k[level])
        if slot <= segment:
            return SearchOutcome(distance + slot, len(trace) - 1, True, tuple(trace))
        distance += segment
        level = jump_target(rng, level)
        trace.append(level)
    return _terminal(rng, terminal, distance, trace, rates.lambda_k[0])


def _next_crossing(
    network: StreetNetwork,
    orientation: Orientation,
    position: float,
    forward: bool,
    levels: range,
) -> tuple[float, int] | None:
    """Nearest street of the given levels strictly ahead of position."""
    best: tuple[float, int] | None = None
    for k in levels:
        coords = network.coordinates(orientation, k)
        if forward:
            i = np.searchsorted(coords, position, side="right")
            if i == len(coords):
                continue
            gap = float(coords[i]) - position
        else:
            i = np.searchsorted(coords, position, side="left")
            if i == 0:
                continue
            gap = position - float(coords[i - 1])
        if best is None or gap < best[0]:
            best = (gap, k)
    return best


def default_start(network: StreetNetwork, rng: np.random.Generator) -> tuple[float, float]:
    """
    Pick a uniformly random level-k_max horizontal street, entered at x = 0.

    Raises
    ------
        DomainError: If the top level has no horizontal street
    """
    streets = network.coordinates(Orientation.HORIZONTAL, network.k_max)
    if len(streets) == 0:
        raise DomainError(f"no horizontal street at level {network.k_max} to start from")
    return 0.0, float(streets[rng.integers(len(streets))])


def simulate_on_network(
    network: StreetNetwork,
    start_point: tuple[float, float] | None,
    rng: np.random.Generator,
    strategy: Strategy = Strategy.JUMPLESS,
) -> SearchOutcome:
    """
    Walk the actual streets, alternating East and South.

    The car starts East on a level-k_max horizontal street. At each turn it
    takes the next crossing street of level exactly k-1 (jumpless) or the
    nearest crossing of any lower level (jump-over). On level 0 it drives to
    the edge. Slots pop up on each leg at the street's intensity. Leaving the
    unit square ends the walk unparked with ``exited`` set.

    Parameters
    ----------
        network: Street network
        start_point: (x, y) on a level-k_max horizontal street; random when None
        rng: Generator to draw from
        strategy: JUMPLESS or JUMPOVER turning rule

    Returns
    -------
        SearchOutcome: Distance, turns and visited levels

    Raises
    ------
        DomainError: If the start is not on a top-level horizontal street
    """
    if strategy is Strategy.NETWORK:
        strategy = Strategy.JUMPLESS
    top = network.k_max
    if start_point is None:
        start_point = default_start(network, rng)
    x, y = start_point
    rows = network.coordinates(Orientation.HORIZONTAL, top)
    if not np.any(np.isclose(rows, y, rtol=0.0, atol=1e-12)) or not 0.0 <= x <= 1.0:
        raise DomainError(f"start {start_point} is not on a level-{top} horizontal street")

    level = top
    east = True
    distance = 0.0
    trace = [level]
    while True:
        # heading East we cross vertical streets, heading South horizontal ones
        crossing = Orientation.VERTICAL if east else Orientation.HORIZONTAL
        position = x if east else y
        if level == 0:
            found = None
        elif strategy is Strategy.JUMPLESS:
            found = _next_crossing(network, crossing, position, east, range(level - 1, level))
        else:
            found = _next_crossing(network, crossing, position, east, range(level))
        leg = found[0] if found is not None else (1.0 - position if east else position)

        slot = _first_slot(rng, float(network.intensities[level]))
        if slot <= leg:
            return SearchOutcome(distance + slot, len(trace) - 1, True, tuple(trace))
        distance += leg
        if found is None:
            return SearchOutcome(distance, len(trace) - 1, False, tuple(trace), exited=True)

        if east:
            x += leg
        else:
            y -= leg
        level = found[1]
        trace.append(level)
        east = not east
