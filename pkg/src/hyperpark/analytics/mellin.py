"""
Mellin transforms of the auxiliary functions and the asymptotics they imply.

Transforms are computed on the real axis after the substitution x = e^t with
mpmath's tanh-sinh rule; residues come from closed forms and are validated
against direct evaluation of f.
"""

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

import mpmath
import numpy as np
from scipy.optimize import brentq

from hyperpark.analytics.harmonic import g_product, harmonic_f
from hyperpark.errors import ConvergenceError, DomainError, PoleProximityWarning
from hyperpark.model.config import DEFAULT_EPS, CityConfig

logger = logging.getLogger(__name__)

MELLIN_DPS = 25
MELLIN_TOL = 1e-9
POLE_DISTANCE = 1e-8


@dataclass(frozen=True)
class MellinValue:
    """
    A transform value at one point.

    ``quad_error`` is the quadrature error estimate, or for product formulas
    the estimated truncation error.
    """

    s: complex
    value: complex
    quad_error: float


@dataclass(frozen=True)
class AsymptoticEstimate:
    """Leading behaviour prefactor * x^exponent with its log-periodic wobble."""

    exponent: float
    prefactor: float
    oscillation_amplitude: float
    period: float

    def __call__(self, x: float) -> float:
        """Leading-order value at x."""
        return self.prefactor * x**self.exponent


@dataclass(frozen=True)
class LogPeriodicProfile:
    """Samples of f(x) x^(1/d_F) / prefactor - 1 across one period in log x."""

    log_x_mod_period: np.ndarray = field(repr=False)
    relative_oscillation: np.ndarray = field(repr=False)
    period: float

    @property
    def mean(self) -> float:
        """Average over the period."""
        return float(np.mean(self.relative_oscillation))

    @property
    def amplitude(self) -> float:
        """Largest deviation from zero."""
        return float(np.max(np.abs(self.relative_oscillation)))


def mellin_transform(
    func: Callable[[Any], Any],
    s: complex,
    value_at_zero: float | None = None,
    maxdegree: int = 8,
    tol: float = MELLIN_TOL,
) -> MellinValue:
    """
    Compute ∫_0^∞ func(x) x^(s-1) dx on the log scale.

    When ``value_at_zero`` is given the constant is subtracted on (0, 1) and its
    transform c/s added back, which keeps the integrand decaying at t -> -∞
    for Re(s) > 0.

    Parameters
    ----------
        func: Function of an mpmath real x
        s: Transform argument
        value_at_zero: func(0), when it is nonzero
        maxdegree: Tanh-sinh refinement depth
        tol: Largest acceptable error estimate, relative to |value|

    Returns
    -------
        MellinValue: Value and quadrature error

    Raises
    ------
        ConvergenceError: If the error estimate exceeds tol
    """
    with mpmath.workdps(MELLIN_DPS):
        sm = mpmath.mpmathify(complex(s))
        shift = mpmath.mpf(value_at_zero) if value_at_zero is not None else mpmath.mpf(0)

        def left(t: Any) -> Any:
            return (func(mpmath.exp(t)) - shift) * mpmath.exp(sm * t)

        def right(t: Any) -> Any:
            return func(mpmath.exp(t)) * mpmath.exp(sm * t)

        lo, lo_err = mpmath.quad(left, [-mpmath.inf, 0], error=True, maxdegree=maxdegree)
        hi, hi_err = mpmath.quad(right, [0, mpmath.inf], error=True, maxdegree=maxdegree)
        total = lo + hi
        if value_at_zero is not None:
            total += shift / sm
        value = complex(total)
        error = float(lo_err + hi_err)

    if error > tol * max(abs(value), 1.0):
        raise ConvergenceError(f"Mellin transform at s={s} did not converge", achieved=error)
    return MellinValue(s=complex(s), value=value, quad_error=error)


def mellin_log1p(s: complex) -> complex:
    """
    Closed-form Mellin transform of log(1 + x), π / (s sin(πs)).

    Parameters
    ----------
        s: Argument with -1 < Re(s) < 0

    Returns
    -------
        complex: Transform value

    Raises
    ------
        DomainError: Outside the fundamental strip
    """
    s = complex(s)
    if not -1.0 < s.real < 0.0:
        raise DomainError(f"log(1+x) has a Mellin transform only for -1 < Re(s) < 0, got {s}")
    return complex(math.pi / (s * cmath.sin(math.pi * s)))


def _g_mp(alpha: float) -> Callable[[Any], Any]:
    def g(x: Any) -> Any:
        xf = float(x)
        if xf > 1e300:
            return mpmath.mpf(0)
        return mpmath.mpf(g_product(xf, alpha).value)

    return g


def mellin_g_star(s: complex, alpha: float, maxdegree: int = 8) -> MellinValue:
    """
    Mellin transform g*(s) of g(x) = Π_{j>=1} 1/(1 + x α^j).

    g decays faster than any power, so the transform exists for Re(s) > 0.

    Parameters
    ----------
        s: Argument with Re(s) > 0
        alpha: Ratio in (0, 1)
        maxdegree: Tanh-sinh refinement depth

    Returns
    -------
        MellinValue: g*(s)
    """
    s = complex(s)
    if not s.real > 0.0:
        raise DomainError(f"g* exists only for Re(s) > 0, got {s}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    result = mellin_transform(_g_mp(alpha), s, value_at_zero=1.0, maxdegree=maxdegree)
    logger.debug("g*(%s) = %s (err %.2e)", s, result.value, result.quad_error)
    return result


def _pole(cfg: CityConfig, k: int) -> complex:
    """s_k = 1/d_F + 2πik / log α, where α^(-s) = 2."""
    return complex(1.0 / cfg.d_F, 2.0 * math.pi * k / math.log(cfg.alpha))


def fluctuation_harmonics(cfg: CityConfig, n: int = 3) -> np.ndarray:
    """
    Fourier coefficients of the log-periodic factor, g*(s_k) / g*(s_0).

    f(x) x^(1/d_F) ≈ prefactor * (1 + 2 Re Σ_{k>=1} c_k x^(-2πik / log α)).

    Parameters
    ----------
        cfg: City configuration
        n: Number of harmonics

    Returns
    -------
        np.ndarray: Complex coefficients c_1..c_n
    """
    base = mellin_g_star(_pole(cfg, 0), cfg.alpha).value
    return np.array([mellin_g_star(_pole(cfg, k), cfg.alpha).value / base for k in range(1, n + 1)])


def asymptotic_mean_constant(cfg: CityConfig, harmonics: int = 3) -> AsymptoticEstimate:
    """
    Leading large-x behaviour of f(x) = C x^(-1/d_F) (1 + P(log x)).

    The simple pole of f* at 1/d_F has residue (L / log α) g*(1/d_F); since
    α^(-1/d_F) = 2 the prefactor is -L g*(1/d_F) / log α, which is positive.

    Parameters
    ----------
        cfg: City configuration
        harmonics: Harmonics used to bound the oscillation

    Returns
    -------
        AsymptoticEstimate: Exponent, prefactor, amplitude and period
    """
    g_star = mellin_g_star(1.0 / cfg.d_F, cfg.alpha)
    prefactor = -cfg.L * g_star.value.real / math.log(cfg.alpha)
    amplitude = 0.0
    if harmonics > 0:
        amplitude = 2.0 * float(np.sum(np.abs(fluctuation_harmonics(cfg, harmonics))))
    logger.info("prefactor %.10g, oscillation amplitude %.3e", prefactor, amplitude)
    return AsymptoticEstimate(
        exponent=-1.0 / cfg.d_F,
        prefactor=prefactor,
        oscillation_amplitude=amplitude,
        period=cfg.period,
    )


def log_periodic_profile(
    cfg: CityConfig,
    x0: float = 1e6,
    n_samples: int = 64,
    estimate: AsymptoticEstimate | None = None,
    eps: float = DEFAULT_EPS,
) -> LogPeriodicProfile:
    """
    Sample the relative oscillation of f(x) x^(1/d_F) over one period.

    Parameters
    ----------
        cfg: City configuration
        x0: Start of the period
        n_samples: Samples across the period
        estimate: Precomputed constant; computed when omitted
        eps: Tolerance for f

    Returns
    -------
        LogPeriodicProfile: Samples ordered by log x mod period

    Raises
    ------
        DomainError: If eps is too loose to resolve f to 1e-10 at the samples
    """
    if n_samples < 2:
        raise DomainError(f"need at least 2 samples, got {n_samples}")
    if estimate is None:
        estimate = asymptotic_mean_constant(cfg, harmonics=0)
    period = cfg.period
    offsets = period * np.arange(n_samples) / n_samples
    logs = math.log(x0) + offsets
    values = np.empty(n_samples)
    for i, lx in enumerate(logs):
        x = math.exp(lx)
        f = harmonic_f(x, cfg.alpha, cfg.L, eps)
        if f.truncation_bound > 1e-10 * f.value:
            raise DomainError(
                f"f({x:g}) cannot be resolved to 1e-10 with eps={eps:g}, bound {f.truncation_bound:.2e}"
            )
        values[i] = f.value * x ** (1.0 / cfg.d_F) / estimate.prefactor - 1.0
    phase = np.mod(logs, period)
    order = np.argsort(phase)
    return LogPeriodicProfile(
        log_x_mod_period=phase[order], relative_oscillation=values[order], period=period
    )


@lru_cache(maxsize=64)
def _jstar_normalization(alpha: float, n_terms: int) -> float:
    """π / Π_k (1 - α^k) / (1 - α^k / 2)."""
    k = np.arange(1, n_terms + 1, dtype=float)
    a = alpha**k
    return math.pi / math.prod((1.0 - a) / (1.0 - a / 2.0))


def jumpover_jstar(s: complex, alpha: float, n_terms: int = 40) -> MellinValue:
    """
    Mellin transform candidate j*(s) for the jump-over search.

    j*(s) = N (α^s / sin(πs)) Π_{k=1}^{n} (1 - (α^(k-s)/2) / (1 - α^(k-s)/2)),
    normalized so that j*(s) ~ 1/s at 0. The zeros of 1 - α^(k-s) cancel the
    poles of 1/sin(πs) at s = 1..n.

    Parameters
    ----------
        s: Complex argument, not a nonpositive integer
        alpha: Ratio in (0, 1)
        n_terms: Factors kept in the product

    Returns
    -------
        MellinValue: Value with an estimate of the truncation error

    Raises
    ------
        DomainError: At a pole of 1/sin(πs) not cancelled by the product
    """
    if n_terms < 1:
        raise DomainError(f"n_terms must be at least 1, got {n_terms}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    s = complex(s)
    log_alpha = math.log(alpha)
    m = round(s.real)
    near_integer = abs(s - m) < POLE_DISTANCE
    if near_integer and not 1 <= m <= n_terms:
        raise DomainError(f"j* has a pole at s = {m}")

    value: complex = cmath.exp(s * log_alpha) * _jstar_normalization(alpha, n_terms)
    sine_used = False
    for k in range(1, n_terms + 1):
        a = cmath.exp((k - s) * log_alpha)
        denominator = 1.0 - a / 2.0
        if abs(denominator) < POLE_DISTANCE:
            warnings.warn(
                f"j* evaluated within {abs(denominator):.1e} of a pole at s={s}",
                PoleProximityWarning,
                stacklevel=2,
            )
        if near_integer and k == m:
            # (1 - α^(m-s)) / sin(πs) -> log α / (π (-1)^m)
            value *= log_alpha / (math.pi * (-1) ** m) / denominator
            sine_used = True
        else:
            value *= (1.0 - a) / denominator
    if not sine_used:
        value /= cmath.sin(math.pi * s)

    tail = abs(cmath.exp((n_terms + 1 - s) * log_alpha)) / (1.0 - alpha)
    return MellinValue(s=s, value=value, quad_error=abs(value) * tail)


def jumpover_dominant_pole(alpha: float) -> float:
    """
    Locate the real pole of j* at the root of 1 - α^(1-s)/2, which is 1 + 1/d_F.

    Parameters
    ----------
        alpha: Ratio in (0, 1/4]

    Returns
    -------
        float: Pole location
    """
    if not 0.0 < alpha <= 0.25:
        raise DomainError(f"alpha must lie in (0, 1/4], got {alpha}")
    return float(brentq(lambda s: 1.0 - alpha ** (1.0 - s) / 2.0, 1.0, 2.0, xtol=1e-14))
