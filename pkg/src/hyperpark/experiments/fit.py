"""Power-law exponent fits over geometric intensity grids."""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import linregress

from hyperpark.errors import FitError
from hyperpark.model.config import CityConfig

GRID_RTOL = 1e-9


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares line through (log λ, log value)."""

    slope: float
    intercept: float
    r_squared: float
    residual_amplitude: float
    grid: tuple[float, ...]
    slope_stderr: float = 0.0
    intercept_stderr: float = 0.0

    @property
    def prefactor(self) -> float:
        """exp(intercept), the constant in value ≈ C λ^slope."""
        return math.exp(self.intercept)


def lambda_grid(cfg: CityConfig, anchor: float = 1e3, count: int = 9, ratio: float | None = None) -> np.ndarray:
    """
    Geometric grid anchor * ratio^n, n = 0..count-1.

    The default ratio 1/α spans exactly one log-period per step, so the
    log-periodic wobble is the same at every point.

    Parameters
    ----------
        cfg: City configuration, for α
        anchor: First intensity
        count: Number of points
        ratio: Step ratio, 1/α by default

    Returns
    -------
        np.ndarray: Intensities
    """
    if anchor <= 0.0 or count < 1:
        raise FitError(f"grid needs a positive anchor and count, got {anchor}, {count}")
    step = 1.0 / cfg.alpha if ratio is None else ratio
    if step <= 1.0:
        raise FitError(f"grid ratio must exceed 1, got {step}")
    return anchor * step ** np.arange(count, dtype=float)


def _common_ratio(grid: np.ndarray) -> float | None:
    ratios = grid[1:] / grid[:-1]
    if np.allclose(ratios, ratios[0], rtol=GRID_RTOL, atol=0.0):
        return float(ratios[0])
    return None


def fit_scaling_exponent(
    points: Sequence[tuple[float, float]],
    period_aligned: bool = False,
    alpha: float | None = None,
) -> ExponentFit:
    """
    Fit value ≈ C λ^slope by least squares on the log-log scale.

    Parameters
    ----------
        points: (λ, value) pairs
        period_aligned: Require a geometric grid with ratio 1/α
        alpha: α, needed to check period alignment

    Returns
    -------
        ExponentFit: Slope, intercept and fit quality

    Raises
    ------
        FitError: With fewer than 4 points, nonpositive values, repeated
            abscissae, or a grid that is not period-aligned when requested
    """
    if len(points) < 4:
        raise FitError(f"need at least 4 points, got {len(points)}")
    arr = np.asarray(points, dtype=float)
    lam, value = arr[:, 0], arr[:, 1]
    if np.any(lam <= 0.0) or np.any(value <= 0.0) or not np.all(np.isfinite(arr)):
        raise FitError("all intensities and values must be positive and finite")
    order = np.argsort(lam)
    lam, value = lam[order], value[order]
    if np.any(np.diff(lam) <= 0.0):
        raise FitError("intensities must be distinct")
    if period_aligned:
        ratio = _common_ratio(lam)
        if ratio is None:
            raise FitError("period-aligned fits need a geometric grid")
        if alpha is not None and not math.isclose(ratio, 1.0 / alpha, rel_tol=1e-6):
            raise FitError(f"grid ratio {ratio:g} does not match 1/alpha = {1.0 / alpha:g}")

    x = np.log(lam)
    y = np.log(value)
    result = linregress(x, y)
    residuals = y - (result.intercept + result.slope * x)
    return ExponentFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue**2),
        residual_amplitude=float(np.max(np.abs(residuals))),
        grid=tuple(float(v) for v in lam),
        slope_stderr=float(result.stderr),
        intercept_stderr=float(result.intercept_stderr),
    )
