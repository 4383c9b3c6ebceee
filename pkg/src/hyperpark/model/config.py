"""City parameters, derived rates and dimension formulas."""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from hyperpark.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-12

# Keys understood by load_config_file.
CONFIG_KEYS = frozenset(
    {
        "p",
        "L",
        "lambda",
        "k_max",
        "seed",
        "strategy",
        "modulation",
        "beta",
        "theta",
        "mu",
        "sigma",
        "terminal",
        "reps",
        "eps",
        "threads",
    }
)

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*[:=]\s*(.*?)\s*$")


def hyperfractal_dimension(q: float) -> float:
    """
    Compute the hyperfractal dimension of the binary Manhattan construction.

    Each quadrant of half the side length receives a fraction q/4 of the mass,
    so (1/2)^d_F = q/4.

    Parameters
    ----------
        q: Mass complement 1 - p, in (0, 1]

    Returns
    -------
        float: d_F = log(4/q) / log 2

    Raises
    ------
        DomainError: If q is not in (0, 1]
    """
    if not 0.0 < q <= 1.0:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    return math.log(4.0 / q) / math.log(2.0)


@dataclass(frozen=True)
class GeneralizedScaling:
    """Length contraction s and mass contraction r of a generic refinement step."""

    s: float
    r: float


def generalized_dimension(g: GeneralizedScaling) -> float:
    """
    Compute d_F = log r / log s for a generic self-similar construction.

    Parameters
    ----------
        g: Length and mass contraction ratios

    Returns
    -------
        float: The hyperfractal dimension

    Raises
    ------
        DomainError: If s or r is outside (0, 1)
    """
    if not (0.0 < g.s < 1.0 and 0.0 < g.r < 1.0):
        raise DomainError(f"s and r must lie in (0, 1), got s={g.s}, r={g.r}")
    return math.log(g.r) / math.log(g.s)


@dataclass(frozen=True)
class CityConfig:
    """
    Parameters of the binary hyperfractal city.

    ``k_max=None`` stands for an infinitely deep construction; analytic code then
    truncates adaptively (see ``truncation_depth``).
    """

    p: float = 0.5
    L: float = 1.0
    lam: float = 0.0
    k_max: int | None = None

    def __post_init__(self) -> None:
        """Validate the parameters."""
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not self.L > 0.0 or math.isinf(self.L):
            raise DomainError(f"L must be finite and positive, got {self.L}")
        if not self.lam >= 0.0 or math.isinf(self.lam):
            raise DomainError(f"lambda must be finite and nonnegative, got {self.lam}")
        if self.k_max is not None and self.k_max < 0:
            raise DomainError(f"k_max must be nonnegative, got {self.k_max}")

    @property
    def q(self) -> float:
        """Mass complement 1 - p."""
        return 1.0 - self.p

    @property
    def alpha(self) -> float:
        """Contraction ratio q/4."""
        return self.q / 4.0

    @property
    def d_F(self) -> float:
        """Hyperfractal dimension."""
        return hyperfractal_dimension(self.q)

    @property
    def rho(self) -> float:
        """Scaled intensity λLp/2; the level-k segment load is rho * alpha**k."""
        return self.lam * self.L * self.p / 2.0

    @property
    def is_infinite(self) -> bool:
        """True when the construction has no maximum depth."""
        return self.k_max is None

    @property
    def period(self) -> float:
        """Period |log α| of the log-periodic fluctuations."""
        return -math.log(self.alpha)

    def with_lambda(self, lam: float) -> "CityConfig":
        """
        Copy the configuration with another total intensity.

        Parameters
        ----------
            lam: Total pop-up intensity

        Returns
        -------
            CityConfig: New configuration
        """
        return replace(self, lam=lam)

    def finite_depth(self) -> int:
        """
        Get k_max, refusing the infinite sentinel.

        Returns
        -------
            int: The maximum depth

        Raises
        ------
            DomainError: If k_max is infinite
        """
        if self.k_max is None:
            raise DomainError("this operation needs a finite k_max")
        return self.k_max


def level_density(cfg: CityConfig, k: int) -> float:
    """
    Get the uniform mass density on a level-k street, μ_k = (p/2)(q/2)^k.

    Parameters
    ----------
        cfg: City configuration
        k: Depth index

    Returns
    -------
        float: μ_k

    Raises
    ------
        DomainError: If k is negative
    """
    if k < 0:
        raise DomainError(f"depth index must be nonnegative, got {k}")
    return (cfg.p / 2.0) * (cfg.q / 2.0) ** k


def street_count(k: int) -> int:
    """
    Count the streets of level k in the deterministic construction.

    Parameters
    ----------
        k: Depth index

    Returns
    -------
        int: 2 for the central cross, 2^(k+1) above it
    """
    if k < 0:
        raise DomainError(f"depth index must be nonnegative, got {k}")
    return 2 if k == 0 else 2 ** (k + 1)


def mass_closure(cfg: CityConfig, depth: int) -> float:
    """
    Sum street_count(k) * μ_k over levels 0..depth.

    The infinite sum is 1; the truncated sum is 1 - q^(depth+1).

    Parameters
    ----------
        cfg: City configuration
        depth: Last level included

    Returns
    -------
        float: Total mass carried by levels 0..depth
    """
    return math.fsum(street_count(k) * level_density(cfg, k) for k in range(depth + 1))


@dataclass(frozen=True)
class DerivedRates:
    """Per-level pop-up intensities and segment rates for levels 0..depth."""

    lambda_k: np.ndarray = field(repr=False)
    seg_rate_k: np.ndarray = field(repr=False)

    @property
    def depth(self) -> int:
        """Deepest level covered."""
        return len(self.lambda_k) - 1

    @property
    def mean_length(self) -> np.ndarray:
        """Mean segment length per level, L / 2^k."""
        return 1.0 / self.seg_rate_k

    def per_segment_load(self) -> np.ndarray:
        """
        Expected number of pop-ups on one segment per level.

        Returns
        -------
            np.ndarray: λ_k * L / 2^k, equal to ρ α^k
        """
        return self.lambda_k * self.mean_length


def derived_rates(cfg: CityConfig, depth: int | None = None) -> DerivedRates:
    """
    Tabulate λ_k = μ_k λ and the reciprocal mean segment length 2^k / L.

    Parameters
    ----------
        cfg: City configuration
        depth: Deepest level; defaults to k_max

    Returns
    -------
        DerivedRates: Arrays indexed by level
    """
    if depth is None:
        depth = cfg.finite_depth()
    k = np.arange(depth + 1, dtype=float)
    mu = (cfg.p / 2.0) * (cfg.q / 2.0) ** k
    return DerivedRates(lambda_k=mu * cfg.lam, seg_rate_k=2.0**k / cfg.L)


def truncation_depth(cfg: CityConfig, eps: float = DEFAULT_EPS) -> int:
    """
    Choose the adaptive depth K(ε) standing in for an infinite k_max.

    Levels deeper than K contribute at most L/2^K to distances and at most
    ρ α^(K+1) / (1 - α) to the log-products, both kept below ε.

    Parameters
    ----------
        cfg: City configuration
        eps: Relative tolerance

    Returns
    -------
        int: Truncation depth

    Raises
    ------
        DomainError: If eps is not positive
    """
    if eps <= 0.0:
        raise DomainError(f"tolerance must be positive, got {eps}")
    depth = math.ceil(math.log2(1.0 / eps))
    if cfg.rho > 0.0:
        # smallest K with rho * alpha^(K+1) / (1 - alpha) <= eps
        ratio = cfg.rho / (eps * (1.0 - cfg.alpha))
        depth = max(depth, math.ceil(math.log(ratio) / cfg.period) - 1)
    return max(depth, 1)


def load_config_file(path: Path) -> dict[str, str]:
    """
    Read a flat ``key = value`` configuration file.

    Parameters
    ----------
        path: Path to the file

    Returns
    -------
        dict[str, str]: Raw values keyed by configuration key

    Raises
    ------
        FileNotFoundError: If the file does not exist
        ConfigError: On malformed lines or unknown keys
    """
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    values: dict[str, str] = {}
    for number, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        match = _LINE.match(line)
        if match is None:
            raise ConfigError(f"expected 'key = value', got {raw!r}", line=number)
        key, value = match.groups()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=number)
        values[key] = value
    logger.debug("loaded %d keys from %s", len(values), path)
    return values


def parse_depth(value: str | int | None) -> int | None:
    """
    Parse a k_max value, mapping ``inf``/``infinite`` to None.

    Parameters
    ----------
        value: Text, integer or None

    Returns
    -------
        int | None: Depth or the infinite sentinel
    """
    if value is None or isinstance(value, int):
        return value
    text = value.strip().lower()
    if text in {"inf", "infinite", "infinity", "none"}:
        return None
    try:
        return int(text)
    except ValueError as e:
        raise DomainError(f"k_max must be an integer or 'inf', got {value!r}") from e
