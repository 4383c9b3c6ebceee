"""Deterministic and Poisson hyperfractal street networks."""

import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np
import pyarrow as pa
import pyarrow.csv as pacsv
from pyarrow.lib import ArrowInvalid

from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig, derived_rates, parse_depth

logger = logging.getLogger(__name__)

# Deterministic networks hold 2^(k_max + 2) - 2 streets; past this they stop fitting in memory.
MAX_NETWORK_DEPTH = 24

NETWORK_FORMAT = "hyperpark.network/1"
COLUMNS = ["level", "orientation", "coordinate", "intensity"]


class NetworkKind(str, Enum):
    """How street positions are generated."""

    DETERMINISTIC = "deterministic"
    POISSON = "poisson"


class Orientation(str, Enum):
    """Street orientation; vertical streets sit at an x, horizontal ones at a y."""

    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


class Street(NamedTuple):
    """One street of the network."""

    level: int
    orientation: Orientation
    coordinate: float
    intensity: float


@dataclass(frozen=True, eq=False)
class StreetNetwork:
    """
    Streets of the unit square grouped by level and orientation.

    Level k holds disjoint sorted coordinate arrays for each orientation and
    one pop-up intensity λ_k = μ_k λ shared by all its streets.
    """

    cfg: CityConfig
    kind: NetworkKind
    vertical: tuple[np.ndarray, ...] = field(repr=False)
    horizontal: tuple[np.ndarray, ...] = field(repr=False)
    intensities: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def k_max(self) -> int:
        """Deepest level."""
        return len(self.intensities) - 1

    def coordinates(self, orientation: Orientation, level: int) -> np.ndarray:
        """
        Sorted positions of the streets of one level and orientation.

        Parameters
        ----------
            orientation: Street orientation
            level: Depth index

        Returns
        -------
            np.ndarray: x for vertical streets, y for horizontal ones
        """
        layers = self.vertical if orientation is Orientation.VERTICAL else self.horizontal
        return layers[level]

    def street_count(self, level: int) -> int:
        """Number of streets of a level, both orientations together."""
        return len(self.vertical[level]) + len(self.horizontal[level])

    @property
    def total_streets(self) -> int:
        """Number of streets in the network."""
        return sum(self.street_count(k) for k in range(self.k_max + 1))

    def streets(self) -> Iterator[Street]:
        """
        Iterate over all streets, level by level, vertical first.

        Yields
        ------
            Street: Level, orientation, coordinate and intensity
        """
        for k in range(self.k_max + 1):
            for orientation in Orientation:
                for c in self.coordinates(orientation, k):
                    yield Street(k, orientation, float(c), float(self.intensities[k]))


def _check_depth(cfg: CityConfig) -> int:
    depth = cfg.finite_depth()
    if depth > MAX_NETWORK_DEPTH:
        raise DomainError(
            f"k_max={depth} exceeds the network limit of {MAX_NETWORK_DEPTH}; "
            "use the segment model for deeper cities"
        )
    return depth


def dyadic_positions(level: int) -> np.ndarray:
    """
    Positions of the level-k streets of the deterministic grid.

    Level 0 is the central cross at 1/2; level k >= 1 has 2^k streets at
    (2i + 1) / 2^(k+1).

    Parameters
    ----------
        level: Depth index

    Returns
    -------
        np.ndarray: Sorted coordinates in (0, 1)
    """
    if level == 0:
        return np.array([0.5])
    return (2.0 * np.arange(2**level) + 1.0) / 2.0 ** (level + 1)


def generate_deterministic_network(cfg: CityConfig) -> StreetNetwork:
    """
    Build the dyadic grid up to k_max.

    Parameters
    ----------
        cfg: City configuration with finite k_max

    Returns
    -------
        StreetNetwork: 2 streets at level 0 and 2^(k+1) at level k >= 1

    Raises
    ------
        DomainError: If k_max is infinite or too deep to materialize
    """
    depth = _check_depth(cfg)
    layers = tuple(dyadic_positions(k) for k in range(depth + 1))
    network = StreetNetwork(
        cfg=cfg,
        kind=NetworkKind.DETERMINISTIC,
        vertical=layers,
        horizontal=layers,
        intensities=derived_rates(cfg, depth).lambda_k,
    )
    logger.debug("deterministic network with %d streets", network.total_streets)
    return network


def generate_poisson_network(
    cfg: CityConfig, rng: np.random.Generator, seed: int | None = None
) -> StreetNetwork:
    """
    Draw a Poisson hyperfractal network.

    Each level k and orientation gets Poisson(2^k) streets at i.i.d. uniform
    positions; the layers are disjoint.

    Parameters
    ----------
        cfg: City configuration with finite k_max
        rng: Generator to draw from
        seed: Seed to record in the network header

    Returns
    -------
        StreetNetwork: Random network
    """
    depth = _check_depth(cfg)
    vertical = []
    horizontal = []
    for k in range(depth + 1):
        for layers in (vertical, horizontal):
            count = rng.poisson(2.0**k)
            layers.append(np.sort(rng.uniform(0.0, 1.0, count)))
    return StreetNetwork(
        cfg=cfg,
        kind=NetworkKind.POISSON,
        vertical=tuple(vertical),
        horizontal=tuple(horizontal),
        intensities=derived_rates(cfg, depth).lambda_k,
        seed=seed,
    )


def _header(network: StreetNetwork) -> str:
    cfg = network.cfg
    seed = "none" if network.seed is None else str(network.seed)
    return (
        f"# schema: {NETWORK_FORMAT}\n"
        f"# kind={network.kind.value} p={cfg.p!r} L={cfg.L!r} lambda={cfg.lam!r} "
        f"k_max={network.k_max} seed={seed}\n"
    )


def network_text(network: StreetNetwork) -> str:
    """
    Format a network as one ``level orientation coordinate intensity`` line per street.

    Parameters
    ----------
        network: Network to format

    Returns
    -------
        str: Header comment lines followed by the streets
    """
    levels = []
    orientations = []
    coords = []
    for k in range(network.k_max + 1):
        for orientation in Orientation:
            c = network.coordinates(orientation, k)
            levels.append(np.full(len(c), k, dtype=np.int64))
            orientations.extend([orientation.value] * len(c))
            coords.append(c)
    level_col = np.concatenate(levels)
    table = pa.table(
        {
            "level": level_col,
            "orientation": pa.array(orientations, type=pa.string()),
            "coordinate": np.concatenate(coords),
            "intensity": network.intensities[level_col],
        }
    )
    buffer = io.BytesIO()
    pacsv.write_csv(table, buffer, pacsv.WriteOptions(include_header=False, delimiter=" ", quoting_style="none"))
    return _header(network) + buffer.getvalue().decode()


def write_network(network: StreetNetwork, path: Path) -> None:
    """Write network_text to a file."""
    path.write_text(network_text(network))
    logger.info("wrote %d streets to %s", network.total_streets, path)


def _parse_header(lines: list[str]) -> dict[str, str]:
    values: dict[str, str] = {}
    for line in lines:
        for token in line.lstrip("#").split():
            if "=" in token:
                key, value = token.split("=", 1)
                values[key] = value
    return values


def read_network(path: Path) -> StreetNetwork:
    """
    Read a network written by write_network.

    Parameters
    ----------
        path: Network file

    Returns
    -------
        StreetNetwork: The network

    Raises
    ------
        FileNotFoundError: If the file does not exist
        DomainError: If the file is not a network file
    """
    if not path.exists():
        raise FileNotFoundError(f"Network file not found: {path}")

    text = path.read_text()
    lines = text.splitlines()
    header = [line for line in lines if line.startswith("#")]
    if not header or NETWORK_FORMAT not in header[0]:
        raise DomainError(f"{path} does not appear to be a network file")
    meta = _parse_header(header[1:])
    body = "\n".join(line for line in lines if line and not line.startswith("#"))
    try:
        cfg = CityConfig(
            p=float(meta["p"]),
            L=float(meta["L"]),
            lam=float(meta["lambda"]),
            k_max=parse_depth(meta["k_max"]),
        )
        kind = NetworkKind(meta["kind"])
        table = pacsv.read_csv(
            io.BytesIO(body.encode()),
            read_options=pacsv.ReadOptions(column_names=COLUMNS),
            parse_options=pacsv.ParseOptions(delimiter=" "),
            convert_options=pacsv.ConvertOptions(
                column_types={"level": pa.int64(), "orientation": pa.string(), "coordinate": pa.float64()}
            ),
        )
    except (KeyError, ValueError, ArrowInvalid) as e:
        raise DomainError(f"{path} does not appear to be a network file") from e

    depth = cfg.finite_depth()
    level = table.column("level").to_numpy()
    orientation = np.asarray(table.column("orientation").to_pylist())
    coordinate = table.column("coordinate").to_numpy()
    vertical = []
    horizontal = []
    for k in range(depth + 1):
        at_level = level == k
        vertical.append(np.sort(coordinate[at_level & (orientation == Orientation.VERTICAL.value)]))
        horizontal.append(np.sort(coordinate[at_level & (orientation == Orientation.HORIZONTAL.value)]))
    seed = None if meta.get("seed", "none") == "none" else int(meta["seed"])
    return StreetNetwork(
        cfg=cfg,
        kind=kind,
        vertical=tuple(vertical),
        horizontal=tuple(horizontal),
        intensities=derived_rates(cfg, depth).lambda_k,
        seed=seed,
    )
