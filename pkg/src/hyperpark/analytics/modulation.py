"""Random per-level modulation of the pop-up intensities."""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate, stats
from scipy.special import hyperu

from hyperpark.analytics.harmonic import HarmonicEval, NegLogFactor, _finite_mean, _harmonic_series
from hyperpark.errors import ConvergenceError, DomainError
from hyperpark.model.config import DEFAULT_EPS, CityConfig

logger = logging.getLogger(__name__)

G_RTOL = 1e-10

# Largest log t integrated; math.exp overflows above ~709.
MAX_LOG_T = 700.0


class ModulationKind(str, Enum):
    """Supported laws for the level weights W."""

    CONSTANT = "constant"
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"


@dataclass(frozen=True)
class ModulationLaw:
    """
    Law of the weight W multiplying every intensity on one level.

    ``first`` and ``second`` are (w, unused) for constant, (shape β, scale θ)
    for gamma and (μ, σ) of log W for lognormal.
    """

    kind: ModulationKind
    first: float
    second: float = 0.0

    def __post_init__(self) -> None:
        """Validate the parameters."""
        if not (math.isfinite(self.first) and math.isfinite(self.second)):
            raise DomainError("modulation parameters must be finite")
        if self.kind is ModulationKind.CONSTANT and not self.first > 0.0:
            raise DomainError(f"constant weight must be positive, got {self.first}")
        if self.kind is ModulationKind.GAMMA and not (self.first > 0.0 and self.second > 0.0):
            raise DomainError(f"gamma shape and scale must be positive, got {self.first}, {self.second}")
        if self.kind is ModulationKind.LOGNORMAL and not self.second > 0.0:
            raise DomainError(f"lognormal sigma must be positive, got {self.second}")

    @classmethod
    def constant(cls, w: float = 1.0) -> "ModulationLaw":
        """W ≡ w."""
        return cls(ModulationKind.CONSTANT, w)

    @classmethod
    def gamma(cls, shape: float, scale: float = 1.0) -> "ModulationLaw":
        """W ~ Gamma(shape, scale)."""
        return cls(ModulationKind.GAMMA, shape, scale)

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "ModulationLaw":
        """log W ~ Normal(mu, sigma)."""
        return cls(ModulationKind.LOGNORMAL, mu, sigma)

    @classmethod
    def parse(cls, text: str) -> "ModulationLaw":
        """
        Parse ``none``, ``constant:w``, ``gamma:β:θ`` or ``lognormal:μ:σ``.

        Parameters
        ----------
            text: Law description

        Returns
        -------
            ModulationLaw: Parsed law; ``none`` is constant(1)

        Raises
        ------
            DomainError: If the text cannot be parsed
        """
        name, *params = text.strip().lower().split(":")
        try:
            values = [float(v) for v in params]
        except ValueError as e:
            raise DomainError(f"invalid modulation parameters in {text!r}") from e
        if name == "none" and not values:
            return cls.constant(1.0)
        if name == "constant" and len(values) <= 1:
            return cls.constant(*values)
        if name == "gamma" and len(values) in (1, 2):
            return cls.gamma(*values)
        if name == "lognormal" and len(values) == 2:
            return cls.lognormal(*values)
        raise DomainError(
            f"unknown modulation {text!r}; use none, constant:w, gamma:shape:scale or lognormal:mu:sigma"
        )

    def __str__(self) -> str:
        """Text form accepted by parse."""
        if self.kind is ModulationKind.CONSTANT:
            return f"constant:{self.first:g}"
        return f"{self.kind.value}:{self.first:g}:{self.second:g}"

    def _frozen(self) -> stats.rv_continuous:
        if self.kind is ModulationKind.GAMMA:
            return stats.gamma(a=self.first, scale=self.second)
        if self.kind is ModulationKind.LOGNORMAL:
            return stats.lognorm(s=self.second, scale=math.exp(self.first))
        raise DomainError("a constant weight has no density")

    @property
    def mean(self) -> float:
        """E[W]."""
        if self.kind is ModulationKind.CONSTANT:
            return self.first
        if self.kind is ModulationKind.GAMMA:
            return self.first * self.second
        return math.exp(self.first + self.second**2 / 2.0)

    @property
    def second_moment(self) -> float:
        """E[W^2], finite for every supported law."""
        if self.kind is ModulationKind.CONSTANT:
            return self.first**2
        if self.kind is ModulationKind.GAMMA:
            return self.first * (self.first + 1.0) * self.second**2
        return math.exp(2.0 * self.first + 2.0 * self.second**2)

    def pdf(self, t: np.ndarray | float) -> np.ndarray:
        """
        Density of W.

        Raises
        ------
            DomainError: For the constant law
        """
        return np.asarray(self._frozen().pdf(t))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """
        Draw weights; the constant law consumes no random numbers.

        Parameters
        ----------
            rng: Generator to draw from
            size: Number of weights

        Returns
        -------
            np.ndarray: The weights
        """
        if self.kind is ModulationKind.CONSTANT:
            return np.full(size, self.first)
        if self.kind is ModulationKind.GAMMA:
            return rng.gamma(self.first, self.second, size)
        return rng.lognormal(self.first, self.second, size)

    def satisfies_small_mass_condition(self) -> bool:
        """
        Whether P(W <= t) behaves like t^β near 0 with β > 0.

        Only gamma laws qualify: a constant puts no mass near 0 at all and a
        lognormal decays faster than any power.
        """
        return self.kind is ModulationKind.GAMMA


def gamma_G_closed_form(u: float, shape: float, scale: float) -> float:
    """
    E[1/(1 + uW)] for W ~ Gamma(shape, scale) through Tricomi's function.

    With z = 1/(uθ) the expectation is z U(1, 2 - β, z).

    Parameters
    ----------
        u: Nonnegative argument
        shape: β
        scale: θ

    Returns
    -------
        float: G(u)
    """
    if u < 0.0:
        raise DomainError(f"G is defined for u >= 0, got {u}")
    if u == 0.0:
        return 1.0
    z = 1.0 / (u * scale)
    return float(z * hyperu(1.0, 2.0 - shape, z))


def _quad_G(u: float, law: ModulationLaw) -> float:
    """Integrate the density against 1/(1 + ut) after t = e^y, split at t = 1/u."""
    frozen = law._frozen()

    def integrand(y: float) -> float:
        if y > MAX_LOG_T:
            return 0.0
        t = math.exp(y)
        log_density = float(frozen.logpdf(t))
        if not math.isfinite(log_density):
            return 0.0
        return math.exp(log_density + y) / (1.0 + u * t)

    split = -math.log(u)
    total = 0.0
    error = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in ((-np.inf, split), (split, np.inf)):
            value, err = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=G_RTOL / 10, limit=200)
            total += value
            error += err
    if not total > 0.0 or error > G_RTOL * total:
        raise ConvergenceError(f"G({u:g}) for {law} did not converge", achieved=error / max(total, 1e-300))
    logger.debug("G(%g) for %s: %.12g (err %.2e)", u, law, total, error)
    return total


@lru_cache(maxsize=8192)
def modulated_G(u: float, law: ModulationLaw) -> float:
    """
    Evaluate G(u) = E[1/(1 + uW)].

    Constant laws use the closed form; the others integrate the density with
    a relative error of at most 1e-10.

    Parameters
    ----------
        u: Nonnegative argument
        law: Weight law

    Returns
    -------
        float: G(u) in (0, 1]

    Raises
    ------
        DomainError: If u < 0
        ConvergenceError: If the quadrature misses its tolerance
    """
    if u < 0.0 or math.isnan(u):
        raise DomainError(f"G is defined for u >= 0, got {u}")
    if u == 0.0:
        return 1.0
    if law.kind is ModulationKind.CONSTANT:
        return 1.0 / (1.0 + u * law.first)
    return _quad_G(u, law)


def neg_log_G(law: ModulationLaw) -> NegLogFactor:
    """
    Build the vectorized map u -> -log G(u) for a law.

    Parameters
    ----------
        law: Weight law

    Returns
    -------
        NegLogFactor: Callable over arrays
    """
    if law.kind is ModulationKind.CONSTANT:
        w = law.first
        return lambda u: np.log1p(u * w)

    def factor(u: np.ndarray) -> np.ndarray:
        return np.array([-math.log(modulated_G(float(v), law)) for v in np.atleast_1d(u)])

    return factor


def modulated_mean_distance(
    cfg: CityConfig, law: ModulationLaw, eps: float = DEFAULT_EPS
) -> HarmonicEval:
    """
    Expected jumpless distance when level intensities carry i.i.d. weights.

    f_G(x) = Σ_{k>=1} (L/2^k) Π_{j>=k} G(α^j x) with x = λLp/(2α), so level j
    carries G(ρ α^j). The product tail is certified by -log G(u) <= E[W] u.

    Parameters
    ----------
        cfg: City configuration
        law: Weight law
        eps: Relative tolerance for the infinite case

    Returns
    -------
        HarmonicEval: Mean distance
    """
    neg_log = neg_log_G(law)
    if cfg.is_infinite:
        return _harmonic_series(
            cfg.rho / cfg.alpha,
            cfg.alpha,
            eps * cfg.L,
            weight=0.5,
            scale=cfg.L,
            neg_log=neg_log,
            tail_scale=law.mean,
        )
    depth = cfg.finite_depth()
    value = _finite_mean(cfg.rho, cfg.alpha, cfg.L, depth, neg_log)
    return HarmonicEval(value=value, truncation_bound=0.0, terms_used=depth)
