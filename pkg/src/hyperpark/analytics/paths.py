"""Exact distance moments along an explicit sequence of street segments."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import exprel

from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig, derived_rates

# Below this load the closed form of (1 - e^-y (1+y)) / y^2 loses digits.
SMALL_LOAD = 1e-3


class LengthKind(str, Enum):
    """How segment lengths are specified."""

    FIXED = "fixed"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True, eq=False)
class SegmentPath:
    """
    Ordered street segments with their pop-up intensities.

    ``spans`` holds lengths |S_i| for fixed paths and length rates α_i
    (mean length 1/α_i) for exponential paths.
    """

    intensities: np.ndarray = field(repr=False)
    spans: np.ndarray = field(repr=False)
    kind: LengthKind

    def __post_init__(self) -> None:
        """Validate the segments."""
        if self.intensities.ndim != 1 or len(self.intensities) == 0:
            raise DomainError("a path needs at least one segment")
        if self.intensities.shape != self.spans.shape:
            raise DomainError("intensities and lengths must have the same size")
        if np.any(~np.isfinite(self.intensities)) or np.any(self.intensities < 0):
            raise DomainError("intensities must be finite and nonnegative")
        if np.any(~np.isfinite(self.spans)) or np.any(self.spans <= 0):
            name = "lengths" if self.kind is LengthKind.FIXED else "rates"
            raise DomainError(f"segment {name} must be finite and positive")

    @classmethod
    def fixed(cls, intensities: Sequence[float], lengths: Sequence[float]) -> "SegmentPath":
        """
        Build a path of segments with known lengths.

        Parameters
        ----------
            intensities: λ_i per segment
            lengths: |S_i| per segment

        Returns
        -------
            SegmentPath: Fixed-length path
        """
        return cls(
            np.asarray(intensities, dtype=float),
            np.asarray(lengths, dtype=float),
            LengthKind.FIXED,
        )

    @classmethod
    def exponential(cls, intensities: Sequence[float], rates: Sequence[float]) -> "SegmentPath":
        """
        Build a path of segments with exponentially distributed lengths.

        Parameters
        ----------
            intensities: λ_i per segment
            rates: α_i per segment, mean length 1/α_i

        Returns
        -------
            SegmentPath: Exponential-length path
        """
        return cls(
            np.asarray(intensities, dtype=float),
            np.asarray(rates, dtype=float),
            LengthKind.EXPONENTIAL,
        )

    def __len__(self) -> int:
        """Number of segments."""
        return len(self.intensities)

    def tail(self) -> "SegmentPath":
        """Drop the first segment."""
        return SegmentPath(self.intensities[1:], self.spans[1:], self.kind)

    def _require(self, kind: LengthKind) -> None:
        if self.kind is not kind:
            raise DomainError(f"expected a {kind.value}-length path, got {self.kind.value}")


def level_path(cfg: CityConfig) -> SegmentPath:
    """
    Build the exponential path driven by the jumpless search.

    Segments run from level k_max down to level 1; level k has intensity
    μ_k λ and mean length L / 2^k.

    Parameters
    ----------
        cfg: City configuration with finite k_max

    Returns
    -------
        SegmentPath: Exponential-length path of k_max segments
    """
    depth = cfg.finite_depth()
    if depth == 0:
        raise DomainError("k_max = 0 leaves no segment before the central cross")
    rates = derived_rates(cfg, depth)
    levels = slice(depth, 0, -1)
    return SegmentPath.exponential(rates.lambda_k[levels], rates.seg_rate_k[levels])


def _loads(path: SegmentPath) -> np.ndarray:
    return path.intensities * path.spans


def _survival(loads: np.ndarray) -> np.ndarray:
    """exp(-sum_{j<i} y_j) for every segment i."""
    before = np.concatenate(([0.0], np.cumsum(loads)[:-1]))
    return np.exp(-before)


def _truncated_second(y: np.ndarray) -> np.ndarray:
    """(1 - e^-y (1 + y)) / y^2, finite at y = 0."""
    out = np.empty_like(y)
    small = y < SMALL_LOAD
    ys = y[small]
    out[small] = 0.5 - ys / 3.0 + ys**2 / 8.0 - ys**3 / 30.0
    yl = y[~small]
    out[~small] = -(np.expm1(-yl) + yl * np.exp(-yl)) / yl**2
    return out


def mean_distance_fixed_path(path: SegmentPath) -> float:
    """
    Expected distance to the first free slot along fixed-length segments.

    Sums (1 - e^{-λ_i|S_i|}) / λ_i over segments, each weighted by the
    probability of arriving at it empty-handed. A zero intensity contributes
    its full length. If no slot shows up at all the whole path is driven.

    Parameters
    ----------
        path: Fixed-length path

    Returns
    -------
        float: Mean driven distance
    """
    path._require(LengthKind.FIXED)
    y = _loads(path)
    terms = path.spans * exprel(-y) * _survival(y)
    return math.fsum(terms)


def mean_distance_recursive(path: SegmentPath) -> float:
    """
    Same quantity as mean_distance_fixed_path, unrolled one segment at a time.

    D(S_1..S_k) = (1 - e^{-λ_1|S_1|})/λ_1 + e^{-λ_1|S_1|} D(S_2..S_k), D(∅) = 0.

    Parameters
    ----------
        path: Fixed-length path

    Returns
    -------
        float: Mean driven distance
    """
    path._require(LengthKind.FIXED)
    distance = 0.0
    for lam, length in zip(path.intensities[::-1], path.spans[::-1]):
        y = lam * length
        distance = length * float(exprel(-y)) + math.exp(-y) * distance
    return distance


def mean_distance_exponential(path: SegmentPath) -> float:
    """
    Expected distance when segment lengths are exponential with rates α_i.

    Parameters
    ----------
        path: Exponential-length path

    Returns
    -------
        float: Σ_i (1/α_i)/(1 + λ_i/α_i) Π_{j<i} 1/(1 + λ_j/α_j)
    """
    path._require(LengthKind.EXPONENTIAL)
    ratio = path.intensities / path.spans
    reach = np.exp(-np.concatenate(([0.0], np.cumsum(np.log1p(ratio))[:-1])))
    return math.fsum((1.0 / path.spans) / (1.0 + ratio) * reach)


def second_moment_fixed_path(path: SegmentPath) -> float:
    """
    Second moment of the driven distance along fixed-length segments.

    With σ_i the cumulative length, each segment contributes
    2 [1 + λ_i σ_{i-1} - e^{-λ_i|S_i|}(1 + λ_i σ_i)] / λ_i^2 times its
    survival factor. The bracket is rewritten as
    |S_i|^2 φ(y_i) + σ_{i-1} |S_i| ψ(y_i) so that zero intensities are exact.

    Parameters
    ----------
        path: Fixed-length path

    Returns
    -------
        float: E[D^2]
    """
    path._require(LengthKind.FIXED)
    y = _loads(path)
    s = path.spans
    sigma_before = np.concatenate(([0.0], np.cumsum(s)[:-1]))
    bracket = s**2 * _truncated_second(y) + sigma_before * s * exprel(-y)
    return 2.0 * math.fsum(bracket * _survival(y))


def second_moment_exponential(path: SegmentPath) -> float:
    """
    Second moment of the driven distance with exponential segment lengths.

    On a segment with length rate α and slot rate λ, the distance driven there
    is Exp(λ + α) whether or not the car parks on it, and independent of that
    outcome. The moments then follow a backward recursion over segments.

    Parameters
    ----------
        path: Exponential-length path

    Returns
    -------
        float: E[D^2]
    """
    path._require(LengthKind.EXPONENTIAL)
    mean_rest = 0.0
    second_rest = 0.0
    for lam, rate in zip(path.intensities[::-1], path.spans[::-1]):
        m = 1.0 / (lam + rate)
        c = rate / (lam + rate)
        second_rest = 2.0 * m * m + 2.0 * m * c * mean_rest + c * second_rest
        mean_rest = m + c * mean_rest
    return second_rest


def _check_laplace_argument(s: complex) -> complex:
    s = complex(s)
    if s.real < 0.0:
        raise DomainError(f"Laplace argument needs Re(s) >= 0, got {s}")
    return s


def _laplace_terms(path: SegmentPath, s: complex) -> tuple[np.ndarray, np.ndarray]:
    rate = path.intensities + s
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(rate == 0, 0.0, path.intensities / rate)
    decay = np.exp(-rate * path.spans)
    return weight, decay


def laplace_transform_distance(path: SegmentPath, s: complex) -> complex:
    """
    Laplace transform E[e^{-sD}] of the driven distance along fixed segments.

    Parameters
    ----------
        path: Fixed-length path
        s: Complex argument with Re(s) >= 0

    Returns
    -------
        complex: Transform value; equals 1 at s = 0

    Raises
    ------
        DomainError: If Re(s) < 0
    """
    path._require(LengthKind.FIXED)
    s = _check_laplace_argument(s)
    weight, decay = _laplace_terms(path, s)
    reach = np.concatenate(([1.0 + 0j], np.cumprod(decay)))
    parked = weight * (1.0 - decay) * reach[:-1]
    return complex(np.sum(parked) + reach[-1])


def laplace_recursive(path: SegmentPath, s: complex) -> complex:
    """
    Laplace transform by the one-step recursion on the first segment.

    Parameters
    ----------
        path: Fixed-length path
        s: Complex argument with Re(s) >= 0

    Returns
    -------
        complex: Transform value
    """
    path._require(LengthKind.FIXED)
    s = _check_laplace_argument(s)
    weight, decay = _laplace_terms(path, s)
    value = 1.0 + 0j
    for w, d in zip(weight[::-1], decay[::-1]):
        value = complex(w * (1.0 - d) + d * value)
    return value
