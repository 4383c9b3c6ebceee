"""
Harmonic sums behind the jumpless search on the hyperfractal city.

All infinite sums and products are truncated adaptively; every result carries a
certified bound on the part that was left out.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from hyperpark.errors import DomainError, NegativeVarianceError
from hyperpark.model.config import DEFAULT_EPS, CityConfig, truncation_depth

logger = logging.getLogger(__name__)

NegLogFactor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HarmonicEval:
    """A truncated evaluation and the bound on what truncation omitted."""

    value: float
    truncation_bound: float
    terms_used: int

    def __float__(self) -> float:
        """Return the value."""
        return self.value


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _check_eps(eps: float) -> None:
    if not eps > 0.0:
        raise DomainError(f"tolerance must be positive, got {eps}")


def _product_depth(x: float, alpha: float, eps: float) -> int:
    """Smallest J >= 0 with x α^(J+1) / (1 - α) <= eps."""
    if x == 0.0:
        return 0
    ratio = x / (eps * (1.0 - alpha))
    depth = max(0, math.ceil(math.log(ratio) / -math.log(alpha)) - 1)
    while x * alpha ** (depth + 1) / (1.0 - alpha) > eps:
        depth += 1
    return depth


def _suffix_logs(
    x: float, alpha: float, count: int, neg_log: NegLogFactor = np.log1p
) -> np.ndarray:
    """
    Suffix sums of -log G(x α^m), m = 1..count.

    Entry k is -log of the product over m > k, i.e. -log g(α^k x) truncated at
    m = count; the array has count + 1 entries, the last being 0.
    """
    m = np.arange(1, count + 1, dtype=float)
    a = neg_log(x * alpha**m)
    return np.concatenate((np.cumsum(a[::-1])[::-1], [0.0]))


def log_g(x: float, alpha: float, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Logarithm of g(x) = Π_{j>=1} 1/(1 + x α^j).

    Parameters
    ----------
        x: Nonnegative argument
        alpha: Ratio in (0, 1)
        eps: Bound on the omitted part of the log-sum

    Returns
    -------
        HarmonicEval: log g(x) with an absolute bound on the truncated tail
    """
    if x < 0.0:
        raise DomainError(f"g is defined for x >= 0, got {x}")
    _check_alpha(alpha)
    _check_eps(eps)
    depth = _product_depth(x, alpha, eps)
    j = np.arange(1, depth + 1, dtype=float)
    value = -math.fsum(np.log1p(x * alpha**j))
    tail = x * alpha ** (depth + 1) / (1.0 - alpha)
    return HarmonicEval(value=value, truncation_bound=tail, terms_used=depth)


def g_product(x: float, alpha: float, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Evaluate the auxiliary product g(x) = Π_{j>=1} 1/(1 + x α^j).

    g(0) = 1 and g decreases in x faster than any power.

    Parameters
    ----------
        x: Nonnegative argument
        alpha: Ratio in (0, 1)
        eps: Bound on the omitted part of the log-sum

    Returns
    -------
        HarmonicEval: g(x) in (0, 1] with its truncation bound
    """
    logged = log_g(x, alpha, eps)
    value = math.exp(logged.value)
    bound = -value * math.expm1(-logged.truncation_bound)
    return HarmonicEval(value=value, truncation_bound=bound, terms_used=logged.terms_used)


def _harmonic_series(
    x: float,
    alpha: float,
    eps: float,
    weight: float,
    scale: float,
    neg_log: NegLogFactor = np.log1p,
    tail_scale: float = 1.0,
    h_power: int = 0,
) -> HarmonicEval:
    """
    Σ_{k>=1} scale * weight^k * h(α^k x)^h_power * g(α^k x).

    Terms past the truncation depth are summed in closed form with g = h = 1;
    the bound covers both the truncated products and that approximation.
    ``tail_scale`` bounds -log G(u) / u, which certifies the product tail.
    """
    _check_alpha(alpha)
    _check_eps(eps)
    if x < 0.0:
        raise DomainError(f"harmonic sums need x >= 0, got {x}")
    depth = _product_depth(x * tail_scale, alpha, eps / 2.0)
    count = depth + 1
    suffix = _suffix_logs(x, alpha, count, neg_log)
    k = np.arange(1, count + 1, dtype=float)
    logs = suffix[1:]
    if h_power:
        logs = logs + h_power * np.log1p(x * alpha**k)
    terms = scale * weight**k * np.exp(-logs)
    tail = scale * weight ** (count + 1) / (1.0 - weight)
    value = math.fsum(terms) + tail

    product_tail = tail_scale * x * alpha ** (depth + 1) / (1.0 - alpha)
    y = x * alpha ** (count + 1)
    tail_defect = min(1.0, tail_scale * y * alpha / (1.0 - alpha) + h_power * y)
    bound = product_tail * math.fsum(terms) + tail * tail_defect
    return HarmonicEval(value=value, truncation_bound=bound, terms_used=count)


def harmonic_f(x: float, alpha: float, L: float = 1.0, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Evaluate f(x) = Σ_{k>=1} (L / 2^k) g(α^k x).

    Parameters
    ----------
        x: Nonnegative argument
        alpha: Ratio in (0, 1)
        L: Base street length
        eps: Relative tolerance

    Returns
    -------
        HarmonicEval: f(x), with f(0) = L
    """
    return _harmonic_series(x, alpha, eps * L, weight=0.5, scale=L)


def harmonic_F(x: float, alpha: float, L: float = 1.0, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Evaluate F(x) = Σ_{k>=1} (L^2 / 4^k) h(α^k x) g(α^k x) with h(y) = 1/(1+y)^2.

    Parameters
    ----------
        x: Nonnegative argument
        alpha: Ratio in (0, 1)
        L: Base street length
        eps: Relative tolerance

    Returns
    -------
        HarmonicEval: F(x), with F(0) = L^2 / 3
    """
    return _harmonic_series(x, alpha, eps * L * L, weight=0.25, scale=L * L, h_power=2)


def _finite_mean(rho: float, alpha: float, L: float, depth: int, neg_log: NegLogFactor) -> float:
    """Σ_{k=1}^{depth} (L/2^k) Π_{j=k}^{depth} G(ρ α^j)."""
    if depth == 0:
        return 0.0
    j = np.arange(1, depth + 1, dtype=float)
    b = neg_log(rho * alpha**j)
    from_level = np.cumsum(b[::-1])[::-1]
    return math.fsum(L / 2.0**j * np.exp(-from_level))


def mean_distance_analytic(cfg: CityConfig, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Expected distance driven by the jumpless search.

    For an infinite city this is f(λLp/(2α)); for a finite k_max it is the
    finite sum over levels k_max..1, which carries no truncation error.

    Parameters
    ----------
        cfg: City configuration
        eps: Relative tolerance for the infinite case

    Returns
    -------
        HarmonicEval: Mean distance, L at λ = 0
    """
    if cfg.is_infinite:
        return harmonic_f(cfg.rho / cfg.alpha, cfg.alpha, cfg.L, eps)
    depth = cfg.finite_depth()
    value = _finite_mean(cfg.rho, cfg.alpha, cfg.L, depth, np.log1p)
    return HarmonicEval(value=value, truncation_bound=0.0, terms_used=depth)


@dataclass(frozen=True)
class _LevelMoments:
    mean: float
    variance: float
    mean_bound: float
    variance_bound: float
    depth: int


def _level_moments(cfg: CityConfig, eps: float) -> _LevelMoments:
    """
    Mean and variance by climbing the levels from 1 up to the start depth.

    On level k the driven stretch is Exp with mean m_k = (L/2^k)/(1 + ρα^k)
    and the car moves on with probability c_k = 1/(1 + ρα^k), so
    T_k = m_k + c_k T_{k-1} and V_k = m_k^2 + c_k V_{k-1} + c_k (1 - c_k) T_{k-1}^2.
    """
    depth = truncation_depth(cfg, eps) if cfg.is_infinite else cfg.finite_depth()
    L, rho, alpha = cfg.L, cfg.rho, cfg.alpha
    mean = 0.0
    variance = 0.0
    for k in range(1, depth + 1):
        load = rho * alpha**k
        c = 1.0 / (1.0 + load)
        m = L / 2.0**k * c
        variance = m * m + c * variance + c * (1.0 - c) * mean * mean
        mean = m + c * mean

    if not cfg.is_infinite:
        return _LevelMoments(mean, variance, 0.0, 0.0, depth)
    deep = rho * alpha ** (depth + 1) / (1.0 - alpha)
    mean_bound = L * (2.0**-depth + deep)
    variance_bound = L * L * (4.0**-depth / 3.0 + 7.0 / 3.0 * deep)
    return _LevelMoments(mean, variance, mean_bound, variance_bound, depth)


def variance_analytic(cfg: CityConfig, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Variance of the distance driven by the jumpless search.

    Every term of the level recursion is nonnegative, so no cancellation occurs;
    at λ = 0 the variance is L^2 / 3.

    Parameters
    ----------
        cfg: City configuration
        eps: Relative tolerance for the infinite case

    Returns
    -------
        HarmonicEval: Var(D)

    Raises
    ------
        NegativeVarianceError: If the value is negative beyond its bound
    """
    moments = _level_moments(cfg, eps)
    if moments.variance < -moments.variance_bound:
        raise NegativeVarianceError(
            f"variance {moments.variance:.3e} is negative", achieved=moments.variance_bound
        )
    logger.debug("variance at lambda=%g used %d levels", cfg.lam, moments.depth)
    return HarmonicEval(
        value=max(moments.variance, 0.0),
        truncation_bound=moments.variance_bound,
        terms_used=moments.depth,
    )


def second_moment_analytic(cfg: CityConfig, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Second moment E[D^2] of the jumpless distance.

    Parameters
    ----------
        cfg: City configuration
        eps: Relative tolerance for the infinite case

    Returns
    -------
        HarmonicEval: E[D^2]
    """
    moments = _level_moments(cfg, eps)
    value = moments.variance + moments.mean**2
    bound = moments.variance_bound + moments.mean_bound * (2.0 * moments.mean + moments.mean_bound)
    return HarmonicEval(value=value, truncation_bound=bound, terms_used=moments.depth)


def _deficits(x: float, alpha: float, count: int, eps: float) -> np.ndarray:
    """1 - g(x α^k) for k = 0..count-1."""
    extra = _product_depth(x, alpha, eps)
    suffix = _suffix_logs(x, alpha, count + extra)
    return np.asarray(-np.expm1(-suffix[:count]))


def mean_turn_deficit(x: float, alpha: float, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Limit of E[k_max - T] as k_max grows, -Σ_{k>=0} (g(x α^k) - 1).

    Parameters
    ----------
        x: Scaled intensity λLp/2
        alpha: Ratio in (0, 1)
        eps: Absolute tolerance

    Returns
    -------
        HarmonicEval: Expected number of levels left untraversed
    """
    _check_alpha(alpha)
    _check_eps(eps)
    if x < 0.0:
        raise DomainError(f"x must be nonnegative, got {x}")
    count = _product_depth(x, alpha, eps * (1.0 - alpha))
    deficits = _deficits(x, alpha, count, eps)
    bound = x * alpha ** (count + 1) / (1.0 - alpha) ** 2
    return HarmonicEval(value=math.fsum(deficits), truncation_bound=bound, terms_used=count)


def turns_pgf(x: float, u: complex, alpha: float, eps: float = DEFAULT_EPS) -> complex:
    """
    Limit law of k_max - T: E[u^(k_max - T)] = (1 - u) Σ_{k>=0} (g(x α^k) - 1) u^k + 1.

    Parameters
    ----------
        x: Scaled intensity λLp/2
        u: Complex argument with |u| < 1/α
        alpha: Ratio in (0, 1)
        eps: Absolute tolerance

    Returns
    -------
        complex: Generating function value

    Raises
    ------
        DomainError: If |u| >= 1/α, where the series diverges
    """
    _check_alpha(alpha)
    _check_eps(eps)
    u = complex(u)
    r = alpha * abs(u)
    if r >= 1.0:
        raise DomainError(f"series diverges for |u| >= 1/alpha, got |u| = {abs(u)}")
    if x == 0.0:
        return 1.0 + 0j
    scale = x * alpha / (1.0 - alpha) * abs(1.0 - u) / (1.0 - r)
    count = 1
    while scale * r**count > eps:
        count += 1
    deficits = _deficits(x, alpha, count, eps)
    powers = u ** np.arange(count)
    return complex((1.0 - u) * np.sum(-deficits * powers) + 1.0)


def turn_deficit_pmf(x: float, alpha: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    """
    Probabilities P(k_max - T = k) in the deep-city limit.

    P(0) = g(x) and P(k) = g(x α^k) - g(x α^(k-1)); the list stops once the
    remaining mass is below eps.

    Parameters
    ----------
        x: Scaled intensity λLp/2
        alpha: Ratio in (0, 1)
        eps: Mass left out

    Returns
    -------
        np.ndarray: Probabilities indexed by k
    """
    _check_alpha(alpha)
    _check_eps(eps)
    count = _product_depth(x, alpha, eps) + 2
    deficits = _deficits(x, alpha, count, eps)
    cdf = 1.0 - deficits
    return np.diff(np.concatenate(([0.0], cdf)))


def jumpover_mean_distance(cfg: CityConfig, eps: float = DEFAULT_EPS) -> HarmonicEval:
    """
    Expected distance of the jump-over search by first-step analysis.

    From level k the car moves to level k' < k with probability 2^(k'-k), the
    leftover 2^-k going to level 0. With U_k the 2^-k-weighted sum of the means
    below level k, T_k = m_k + c_k U_k and U_{k+1} = (U_k + T_k) / 2.

    Parameters
    ----------
        cfg: City configuration
        eps: Relative tolerance for the infinite case

    Returns
    -------
        HarmonicEval: Mean distance
    """
    depth = truncation_depth(cfg, eps) if cfg.is_infinite else cfg.finite_depth()
    mean = 0.0
    below = 0.0
    for k in range(1, depth + 1):
        c = 1.0 / (1.0 + cfg.rho * cfg.alpha**k)
        mean = cfg.L / 2.0**k * c + c * below
        below = 0.5 * (below + mean)
    bound = 0.0
    if cfg.is_infinite:
        bound = cfg.L * (2.0**-depth + cfg.rho * cfg.alpha ** (depth + 1) / (1.0 - cfg.alpha))
    return HarmonicEval(value=mean, truncation_bound=bound, terms_used=depth)


def log_g_expansion(x: float, alpha: float, periodic: bool = True) -> float:
    """
    Large-x expansion of log g(x).

    (log x)^2/(2 log α) + (log x)/2 + π^2/(6 log α) + (log α)/12, plus, when
    ``periodic`` is set, the log-periodic part coming from the poles of
    α^-s/(1 - α^-s) on the imaginary axis. With it the remainder is O(1/x).

    Parameters
    ----------
        x: Positive argument
        alpha: Ratio in (0, 1)
        periodic: Include the oscillating correction

    Returns
    -------
        float: Expansion value
    """
    _check_alpha(alpha)
    if x <= 0.0:
        raise DomainError(f"expansion needs x > 0, got {x}")
    la = math.log(alpha)
    lx = math.log(x)
    terms = [lx * lx / (2.0 * la), lx / 2.0, math.pi**2 / (6.0 * la), la / 12.0]
    if periodic:
        for k in range(1, 64):
            t = 2.0 * math.pi * k / abs(la)
            if math.pi * t > 700.0:
                break
            term = -(2.0 * math.pi / la) * math.cos(t * lx) / (t * math.sinh(math.pi * t))
            terms.append(term)
            if abs(term) < 1e-18:
                break
    return math.fsum(terms)
