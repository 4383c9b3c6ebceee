"""Checks tying the analytic results to simulation on intensity grids."""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import PurePath
from typing import Any, Sequence

import numpy as np

from hyperpark.analytics.harmonic import (
    jumpover_mean_distance,
    mean_distance_analytic,
    mean_turn_deficit,
    turns_pgf,
    variance_analytic,
)
from hyperpark.analytics.mellin import jumpover_dominant_pole, jumpover_jstar
from hyperpark.analytics.modulation import ModulationLaw, modulated_G, modulated_mean_distance
from hyperpark.experiments.fit import ExponentFit, fit_scaling_exponent, lambda_grid
from hyperpark.model.config import CityConfig
from hyperpark.sim.montecarlo import MonteCarloSummary, SimulationPlan, monte_carlo
from hyperpark.sim.search import Strategy

logger = logging.getLogger(__name__)

ANALYTIC_SLOPE_TOL = 0.02
MC_SLOPE_TOL = 0.05
VARIANCE_SLOPE_TOL = 0.05
SE_FACTOR = 3.0
TURN_BAND = 2.0
DEFAULT_DEPTH = 25


class Suite(str, Enum):
    """Groups of checks run by ``hyperpark verify``."""

    MEAN = "mean"
    VARIANCE = "variance"
    TURNS = "turns"
    JUMPOVER = "jumpover"
    MODULATION = "modulation"
    ALL = "all"


@dataclass(frozen=True)
class Preset:
    """Grid length and replication count of a verification run."""

    count: int
    reps: int
    mc_points: int


PRESETS = {
    "small": Preset(count=5, reps=2000, mc_points=4),
    "medium": Preset(count=9, reps=20000, mc_points=5),
    "large": Preset(count=9, reps=100000, mc_points=9),
}


@dataclass(frozen=True)
class Check:
    """One comparison and its outcome."""

    name: str
    passed: bool
    observed: float
    expected: float
    tolerance: float
    detail: str = ""


@dataclass
class VerificationReport:
    """Checks of one suite, in grid order."""

    suite: str
    checks: list[Check] = field(default_factory=list)
    fits: dict[str, ExponentFit] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(c.passed for c in self.checks)

    def add(self, name: str, observed: float, expected: float, tolerance: float, detail: str = "") -> Check:
        """
        Record |observed - expected| <= tolerance.

        Returns
        -------
            Check: The recorded check
        """
        passed = bool(abs(observed - expected) <= tolerance)
        check = Check(name, passed, float(observed), float(expected), float(tolerance), detail)
        self.checks.append(check)
        logger.info("%s %s: observed %.6g expected %.6g", "PASS" if passed else "FAIL", name, observed, expected)
        return check

    def add_bound(self, name: str, observed: float, limit: float, detail: str = "") -> Check:
        """Record observed <= limit."""
        passed = bool(observed <= limit)
        check = Check(name, passed, float(observed), float(limit), 0.0, detail)
        self.checks.append(check)
        logger.info("%s %s: %.6g <= %.6g", "PASS" if passed else "FAIL", name, observed, limit)
        return check

    def extend(self, other: "VerificationReport") -> None:
        """Append another report's checks and fits."""
        self.checks.extend(other.checks)
        self.fits.update({f"{other.suite}.{k}": v for k, v in other.fits.items()})

    def to_dict(self) -> dict[str, Any]:
        """Plain data for JSON."""
        return {
            "suite": self.suite,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "fits": {
                name: {
                    "slope": fit.slope,
                    "intercept": fit.intercept,
                    "r_squared": fit.r_squared,
                    "residual_amplitude": fit.residual_amplitude,
                    "grid": list(fit.grid),
                }
                for name, fit in self.fits.items()
            },
        }

    def to_json(self, manifest: dict[str, Any] | None = None) -> str:
        """
        Serialize the report.

        Parameters
        ----------
            manifest: Run manifest to embed

        Returns
        -------
            str: Indented JSON
        """
        data = self.to_dict()
        if manifest is not None:
            data["manifest"] = manifest
        return json.dumps(data, indent=2, default=_jsonable)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, PurePath):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass(frozen=True)
class RunSettings:
    """Grid and Monte Carlo settings shared by the suites."""

    grid: tuple[float, ...]
    reps: int
    master_seed: int = 0
    threads: int = 1
    mc_points: int | None = None

    def mc_grid(self) -> tuple[float, ...]:
        """The leading grid points that also get simulated."""
        if self.mc_points is None:
            return self.grid
        return self.grid[: self.mc_points]


def preset_settings(cfg: CityConfig, preset: str, master_seed: int = 0, threads: int = 1) -> RunSettings:
    """
    Build run settings from a named preset on the default period-aligned grid.

    Parameters
    ----------
        cfg: City configuration
        preset: small, medium or large
        master_seed: Master seed
        threads: Parallel workers

    Returns
    -------
        RunSettings: Grid anchored at 10^3 with ratio 1/α
    """
    p = PRESETS[preset]
    grid = tuple(float(v) for v in lambda_grid(cfg, count=p.count))
    return RunSettings(grid=grid, reps=p.reps, master_seed=master_seed, threads=threads, mc_points=p.mc_points)


def simulation_config(cfg: CityConfig) -> CityConfig:
    """Give an infinite configuration the finite depth used for simulation."""
    return cfg if not cfg.is_infinite else replace(cfg, k_max=DEFAULT_DEPTH)


def _simulate(cfg: CityConfig, lam: float, settings: RunSettings, **options: Any) -> MonteCarloSummary:
    plan = SimulationPlan(cfg=cfg.with_lambda(lam), **options)
    return monte_carlo(plan, settings.reps, settings.master_seed, settings.threads)


def _fit(values: Sequence[tuple[float, float]], cfg: CityConfig) -> ExponentFit:
    return fit_scaling_exponent(values, period_aligned=True, alpha=cfg.alpha)


def verify_mean_theorem(cfg: CityConfig, settings: RunSettings) -> VerificationReport:
    """
    Check the mean distance against simulation and its λ^(-1/d_F) scaling.

    Parameters
    ----------
        cfg: City configuration
        settings: Grid and Monte Carlo settings

    Returns
    -------
        VerificationReport: Pointwise 3-SE checks and exponent checks
    """
    report = VerificationReport("mean")
    cfg = simulation_config(cfg)
    target = -1.0 / cfg.d_F
    analytic = [(lam, mean_distance_analytic(cfg.with_lambda(lam)).value) for lam in settings.grid]
    report.fits["analytic"] = fit = _fit(analytic, cfg)
    report.add("mean.analytic_slope", fit.slope, target, ANALYTIC_SLOPE_TOL)

    simulated = []
    for lam, expected in analytic[: len(settings.mc_grid())]:
        summary = _simulate(cfg, lam, settings)
        simulated.append((lam, summary.mean))
        report.add(f"mean.mc[lambda={lam:g}]", summary.mean, expected, SE_FACTOR * summary.se)
    if len(simulated) >= 4:
        report.fits["mc"] = fit = _fit(simulated, cfg)
        report.add("mean.mc_slope", fit.slope, target, MC_SLOPE_TOL)
    return report


def verify_variance_theorem(cfg: CityConfig, settings: RunSettings) -> VerificationReport:
    """
    Check the exact variance against simulation and its λ^(-2/d_F) scaling.

    Parameters
    ----------
        cfg: City configuration
        settings: Grid and Monte Carlo settings

    Returns
    -------
        VerificationReport: Variance checks
    """
    report = VerificationReport("variance")
    cfg = simulation_config(cfg)
    analytic = [(lam, variance_analytic(cfg.with_lambda(lam)).value) for lam in settings.grid]
    report.fits["analytic"] = fit = _fit(analytic, cfg)
    report.add("variance.analytic_slope", fit.slope, -2.0 / cfg.d_F, VARIANCE_SLOPE_TOL)
    zero = variance_analytic(cfg.with_lambda(0.0)).value
    expected_zero = cfg.L**2 / 3.0 * (1.0 - 4.0 ** (-cfg.finite_depth()))
    report.add("variance.lambda_zero", zero, expected_zero, 1e-12 * cfg.L**2)

    for lam, expected in analytic[: len(settings.mc_grid())]:
        summary = _simulate(cfg, lam, settings)
        report.add(f"variance.mc[lambda={lam:g}]", summary.variance, expected, SE_FACTOR * summary.variance_se)
    return report


def verify_turns_theorem(cfg: CityConfig, settings: RunSettings) -> VerificationReport:
    """
    Check that E[k_max - T] - log2(λ)/d_F stays in a band of width 2.

    Parameters
    ----------
        cfg: City configuration
        settings: Grid and Monte Carlo settings

    Returns
    -------
        VerificationReport: Band checks and histogram comparisons
    """
    report = VerificationReport("turns")
    cfg = simulation_config(cfg)
    offsets = []
    for lam in settings.grid:
        x = cfg.with_lambda(lam).rho
        deficit = mean_turn_deficit(x, cfg.alpha).value
        offsets.append(deficit - math.log2(lam) / cfg.d_F)
    report.add_bound("turns.analytic_band", max(offsets) - min(offsets), TURN_BAND)

    empirical = []
    h = 1e-4
    for lam in settings.mc_grid():
        x = cfg.with_lambda(lam).rho
        summary = _simulate(cfg, lam, settings)
        empirical.append(summary.turn_mean - math.log2(lam) / cfg.d_F)
        slope = (turns_pgf(x, 1.0 + h, cfg.alpha) - turns_pgf(x, 1.0 - h, cfg.alpha)) / (2.0 * h)
        report.add(
            f"turns.pgf_mean[lambda={lam:g}]",
            summary.turn_mean,
            slope.real,
            SE_FACTOR * summary.turn_se + 1e-6,
        )
    if empirical:
        report.add_bound("turns.mc_band", max(empirical) - min(empirical), TURN_BAND)
    return report


def verify_modulation_theorem(
    cfg: CityConfig, laws: Sequence[ModulationLaw], settings: RunSettings
) -> VerificationReport:
    """
    Check that random level weights keep the exponent and move the constant.

    Parameters
    ----------
        cfg: City configuration
        laws: Weight laws to compare
        settings: Grid and Monte Carlo settings

    Returns
    -------
        VerificationReport: Per-law slopes, prefactors and simulation checks
    """
    report = VerificationReport("modulation")
    cfg = simulation_config(cfg)
    target = -1.0 / cfg.d_F
    fits = []
    for law in laws:
        values = [
            (lam, modulated_mean_distance(cfg.with_lambda(lam), law).value) for lam in settings.grid
        ]
        report.fits[str(law)] = fit = _fit(values, cfg)
        fits.append(fit)
        report.add(f"modulation.slope[{law}]", fit.slope, target, MC_SLOPE_TOL, f"prefactor {fit.prefactor:.6g}")
        lam = settings.grid[0]
        summary = _simulate(cfg, lam, settings, law=law)
        report.add(f"modulation.mc[{law},lambda={lam:g}]", summary.mean, values[0][1], SE_FACTOR * summary.se)
        if law.satisfies_small_mass_condition() and law.first < 1.0:
            scaled = [math.log(modulated_G(u, law)) + law.first * math.log(u) for u in (1e2, 1e4, 1e6)]
            report.add_bound(f"modulation.G_tail[{law}]", max(scaled) - min(scaled), 0.5)

    for i in range(len(fits)):
        for j in range(i + 1, len(fits)):
            a, b = fits[i], fits[j]
            noise = SE_FACTOR * max(a.intercept_stderr, b.intercept_stderr, a.residual_amplitude, b.residual_amplitude)
            report.add_bound(
                f"modulation.distinct_prefactors[{laws[i]}|{laws[j]}]",
                -abs(a.intercept - b.intercept),
                -noise,
            )
    return report


def verify_jumpover(cfg: CityConfig, settings: RunSettings) -> VerificationReport:
    """
    Check the jump-over search: its exponent, dominance over the jumpless search, and j*.

    Parameters
    ----------
        cfg: City configuration
        settings: Grid and Monte Carlo settings

    Returns
    -------
        VerificationReport: Jump-over checks
    """
    report = VerificationReport("jumpover")
    cfg = simulation_config(cfg)
    target = -1.0 / cfg.d_F
    analytic = [(lam, jumpover_mean_distance(cfg.with_lambda(lam)).value) for lam in settings.grid]
    report.fits["analytic"] = fit = _fit(analytic, cfg)
    report.add("jumpover.analytic_slope", fit.slope, target, MC_SLOPE_TOL)

    simulated = []
    for lam, expected in analytic[: len(settings.mc_grid())]:
        jump = _simulate(cfg, lam, settings, strategy=Strategy.JUMPOVER)
        plain = _simulate(cfg, lam, settings)
        simulated.append((lam, jump.mean))
        report.add(f"jumpover.mc[lambda={lam:g}]", jump.mean, expected, SE_FACTOR * jump.se)
        report.add_bound(
            f"jumpover.dominance[lambda={lam:g}]",
            jump.mean,
            plain.mean + SE_FACTOR * math.hypot(jump.se, plain.se),
        )
    if len(simulated) >= 4:
        report.fits["mc"] = fit = _fit(simulated, cfg)
        report.add("jumpover.mc_slope", fit.slope, target, MC_SLOPE_TOL)

    pole = jumpover_dominant_pole(cfg.alpha)
    report.add("jumpover.pole", pole, 1.0 + 1.0 / cfg.d_F, 1e-10)
    near = [abs(jumpover_jstar(pole - d, cfg.alpha).value) for d in (1e-2, 1e-3, 1e-4)]
    report.add_bound("jumpover.jstar_diverges", -float(np.min(np.diff(near))), 0.0)
    at_one = abs(jumpover_jstar(1.0, cfg.alpha).value)
    report.add_bound("jumpover.jstar_finite_at_one", at_one, 1e6)
    return report


def run_suite(
    suite: Suite,
    cfg: CityConfig,
    settings: RunSettings,
    laws: Sequence[ModulationLaw] | None = None,
) -> VerificationReport:
    """
    Run one suite, or all of them in a fixed order.

    Parameters
    ----------
        suite: Which checks to run
        cfg: City configuration
        settings: Grid and Monte Carlo settings
        laws: Laws for the modulation suite; constant, gamma(0.5) and gamma(2) by default

    Returns
    -------
        VerificationReport: Combined report
    """
    if laws is None:
        laws = [ModulationLaw.constant(1.0), ModulationLaw.gamma(0.5, 1.0), ModulationLaw.gamma(2.0, 1.0)]
    runners = {
        Suite.MEAN: lambda: verify_mean_theorem(cfg, settings),
        Suite.VARIANCE: lambda: verify_variance_theorem(cfg, settings),
        Suite.TURNS: lambda: verify_turns_theorem(cfg, settings),
        Suite.JUMPOVER: lambda: verify_jumpover(cfg, settings),
        Suite.MODULATION: lambda: verify_modulation_theorem(cfg, laws, settings),
    }
    if suite is not Suite.ALL:
        return runners[suite]()
    report = VerificationReport("all")
    for name, runner in runners.items():
        logger.info("running suite %s", name.value)
        report.extend(runner())
    return report
