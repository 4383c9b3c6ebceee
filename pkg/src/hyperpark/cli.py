"""CLI entry point for hyperpark."""

import logging
from pathlib import Path
from typing import Any, Callable, Optional

import click
import numpy as np
import pyarrow as pa
from rich.console import Console
from rich.logging import RichHandler

from hyperpark import __version__
from hyperpark.analytics.harmonic import (
    g_product,
    jumpover_mean_distance,
    mean_distance_analytic,
    mean_turn_deficit,
    second_moment_analytic,
    variance_analytic,
)
from hyperpark.analytics.mellin import asymptotic_mean_constant, log_periodic_profile
from hyperpark.analytics.modulation import ModulationKind, ModulationLaw, modulated_G, modulated_mean_distance
from hyperpark.errors import ConvergenceError, DomainError
from hyperpark.experiments.verify import RunSettings, Suite, preset_settings, run_suite
from hyperpark.model.config import CityConfig, load_config_file, parse_depth
from hyperpark.report.render import render_estimate, render_network, render_report, render_summary
from hyperpark.sim.montecarlo import SimulationPlan, monte_carlo, outcomes_table
from hyperpark.sim.network import (
    NetworkKind,
    generate_deterministic_network,
    generate_poisson_network,
    network_text,
    read_network,
)
from hyperpark.sim.search import RngStream, Strategy, TerminalRule
from hyperpark.utils import RunManifest, parse_lambda_grid, write_csv

EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

# Config file keys that differ from option names.
_RENAMED = {"L": "length", "lambda": "lam", "k_max": "kmax"}

stderr = Console(stderr=True)


def _modulation_from_config(values: dict[str, str]) -> str | None:
    kind = values.get("modulation")
    if kind is None or ":" in kind:
        return kind
    if kind == "gamma":
        return f"gamma:{values.get('beta', '1')}:{values.get('theta', '1')}"
    if kind == "lognormal":
        return f"lognormal:{values.get('mu', '0')}:{values.get('sigma', '1')}"
    return kind


def config_default_map(values: dict[str, str], commands: list[str]) -> dict[str, dict[str, Any]]:
    """
    Turn config file values into click defaults for every subcommand.

    Parameters
    ----------
        values: Raw key/value pairs from the file
        commands: Subcommand names

    Returns
    -------
        dict[str, dict[str, Any]]: default_map keyed by subcommand
    """
    defaults: dict[str, Any] = {}
    for key, value in values.items():
        if key in {"modulation", "beta", "theta", "mu", "sigma"}:
            continue
        defaults[_RENAMED.get(key, key)] = value
    modulation = _modulation_from_config(values)
    if modulation is not None:
        defaults["modulation"] = modulation
    return {name: dict(defaults) for name in commands}


class HyperparkGroup(click.Group):
    """Group that maps library errors to exit codes."""

    def invoke(self, ctx: click.Context) -> Any:
        """Run the subcommand, translating errors."""
        try:
            return super().invoke(ctx)
        except ConvergenceError as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(EXIT_NUMERIC)
        except (DomainError, FileNotFoundError) as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(EXIT_USAGE)


def model_options(kmax_default: str) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
    """Options shared by every subcommand describing the city."""

    def decorate(func: Callable[..., Any]) -> Callable[..., Any]:
        options = [
            click.option("--p", "p", type=float, default=0.5, show_default=True, help="Mass on the central cross."),
            click.option("--L", "length", type=float, default=1.0, show_default=True, help="Side length."),
            click.option(
                "--kmax",
                "kmax",
                default=kmax_default,
                show_default=True,
                help="Maximum depth, or 'inf'.",
            ),
            click.option("--lambda", "lam", type=float, default=0.0, show_default=True, help="Pop-up intensity."),
            click.option(
                "--seed",
                type=click.IntRange(0, 2**64 - 1),
                default=0,
                envvar="HYPERPARK_SEED",
                show_default=True,
                help="Master seed.",
            ),
        ]
        for option in reversed(options):
            func = option(func)
        return func

    return decorate


def _config(p: float, length: float, lam: float, kmax: str) -> CityConfig:
    return CityConfig(p=p, L=length, lam=lam, k_max=parse_depth(kmax))


def _manifest(ctx: click.Context, seed: int | None) -> RunManifest:
    assert ctx.info_name is not None
    return RunManifest(subcommand=ctx.info_name, parameters=dict(ctx.params), master_seed=seed, version=__version__)


def _lambdas(lam: float, lambda_grid: Optional[str]) -> np.ndarray:
    return parse_lambda_grid(lambda_grid) if lambda_grid else np.array([lam])


@click.group(cls=HyperparkGroup)
@click.version_option(__version__, prog_name="hyperpark")
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Flat key = value file supplying defaults.",
)
@click.option("-v", "--verbose", is_flag=True, help="Log debug messages.")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[Path], verbose: bool) -> None:
    """
    Parking search on hyperfractal Manhattan street networks.

    Evaluate the analytic distance laws, simulate searches and check one
    against the other.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=stderr, show_path=False)],
        force=True,
    )
    if config_path is not None:
        assert isinstance(ctx.command, click.Group)
        ctx.default_map = config_default_map(load_config_file(config_path), list(ctx.command.commands))


@main.command()
@model_options(kmax_default="inf")
@click.option("--lambda-grid", help="Geometric grid start:ratio:count, replacing --lambda.")
@click.option(
    "--quantity",
    type=click.Choice(["mean", "variance", "second-moment", "turns-mean", "jumpover-mean", "g", "G"]),
    default="mean",
    show_default=True,
)
@click.option("--x", "xs", type=float, multiple=True, help="Argument of g or G; repeatable.")
@click.option(
    "--modulation", default="none", show_default=True, help="none, gamma:β:θ or lognormal:μ:σ; mean and G only."
)
@click.option("--eps", type=float, default=1e-12, show_default=True, help="Truncation tolerance.")
@click.option("--output", "-o", type=click.Path(dir_okay=False, allow_dash=True), default="-")
@click.pass_context
def analytic(
    ctx: click.Context,
    p: float,
    length: float,
    kmax: str,
    lam: float,
    seed: int,
    lambda_grid: Optional[str],
    quantity: str,
    xs: tuple[float, ...],
    modulation: str,
    eps: float,
    output: str,
) -> None:
    """Evaluate an analytic quantity as CSV."""
    cfg = _config(p, length, lam, kmax)
    law = ModulationLaw.parse(modulation)
    modulated = law != ModulationLaw.constant(1.0)
    if modulated and quantity not in {"mean", "G"}:
        raise click.UsageError(f"--modulation applies to --quantity mean or G, not {quantity}")

    if quantity in {"g", "G"}:
        column = "x" if quantity == "g" else "u"
        args = list(xs) or [0.0]
        if quantity == "g":
            evals = [g_product(x, cfg.alpha, eps) for x in args]
            values = [(e.value, e.truncation_bound) for e in evals]
        else:
            values = [(modulated_G(x, law), 0.0) for x in args]
        table = pa.table(
            {
                column: pa.array(args, type=pa.float64()),
                "value": pa.array([v for v, _ in values], type=pa.float64()),
                "trunc_bound": pa.array([b for _, b in values], type=pa.float64()),
            }
        )
    else:
        rows = []
        for value in _lambdas(lam, lambda_grid):
            point = cfg.with_lambda(float(value))
            if quantity == "mean":
                result = modulated_mean_distance(point, law, eps) if modulated else mean_distance_analytic(point, eps)
            elif quantity == "variance":
                result = variance_analytic(point, eps)
            elif quantity == "second-moment":
                result = second_moment_analytic(point, eps)
            elif quantity == "turns-mean":
                result = mean_turn_deficit(point.rho, point.alpha, eps)
            else:
                result = jumpover_mean_distance(point, eps)
            rows.append((float(value), result.value, result.truncation_bound))
        table = pa.table(
            {
                "lambda": pa.array([r[0] for r in rows], type=pa.float64()),
                "value": pa.array([r[1] for r in rows], type=pa.float64()),
                "trunc_bound": pa.array([r[2] for r in rows], type=pa.float64()),
            }
        )

    with click.open_file(output, "w") as out:
        write_csv(table, out, "analytic", _manifest(ctx, seed))


@main.command()
@model_options(kmax_default="25")
@click.option(
    "--strategy",
    type=click.Choice([s.value for s in Strategy]),
    default=Strategy.JUMPLESS.value,
    show_default=True,
)
@click.option("--reps", type=click.IntRange(min=1), default=10000, show_default=True)
@click.option(
    "--terminal",
    type=click.Choice([t.value for t in TerminalRule]),
    default=TerminalRule.FORMULA.value,
    show_default=True,
)
@click.option("--modulation", default="none", show_default=True, help="none, gamma:β:θ or lognormal:μ:σ.")
@click.option(
    "--network-kind",
    type=click.Choice([k.value for k in NetworkKind]),
    default=NetworkKind.POISSON.value,
    show_default=True,
    help="Network drawn per replication for --strategy network.",
)
@click.option(
    "--network-file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Fixed network for --strategy network.",
)
@click.option(
    "--turning",
    type=click.Choice([Strategy.JUMPLESS.value, Strategy.JUMPOVER.value]),
    default=Strategy.JUMPLESS.value,
    show_default=True,
    help="Turning rule on networks.",
)
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, allow_dash=True), default="-")
@click.pass_context
def simulate(
    ctx: click.Context,
    p: float,
    length: float,
    kmax: str,
    lam: float,
    seed: int,
    strategy: str,
    reps: int,
    terminal: str,
    modulation: str,
    network_kind: str,
    network_file: Optional[Path],
    turning: str,
    threads: int,
    output: str,
) -> None:
    """Simulate searches and write one CSV row per replication."""
    cfg = _config(p, length, lam, kmax)
    law = ModulationLaw.parse(modulation)
    network = read_network(network_file) if network_file is not None else None
    plan = SimulationPlan(
        cfg=network.cfg if network is not None else cfg,
        strategy=Strategy(strategy),
        law=None if law.kind is ModulationKind.CONSTANT and law.first == 1.0 else law,
        terminal=TerminalRule(terminal),
        network=network,
        network_kind=NetworkKind(network_kind),
        turning=Strategy(turning),
    )
    summary = monte_carlo(plan, reps, seed, threads)
    footer = [
        f"summary: mean={summary.mean!r} se={summary.se!r} variance={summary.variance!r} "
        f"variance_se={summary.variance_se!r} reps={summary.reps}"
    ]
    with click.open_file(output, "w") as out:
        write_csv(outcomes_table(summary), out, "outcomes", _manifest(ctx, seed), footer)
    if output != "-":
        stderr.print(render_summary(summary, title=f"{strategy} at lambda={plan.cfg.lam:g}"))


@main.command()
@model_options(kmax_default="25")
@click.option("--suite", type=click.Choice([s.value for s in Suite]), default=Suite.ALL.value, show_default=True)
@click.option("--preset", type=click.Choice(["small", "medium", "large"]), default="small", show_default=True)
@click.option("--lambda-grid", help="Geometric grid start:ratio:count, replacing the preset grid.")
@click.option("--reps", type=click.IntRange(min=1), help="Replications per point, replacing the preset count.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), help="Also write the JSON here.")
@click.pass_context
def verify(
    ctx: click.Context,
    p: float,
    length: float,
    kmax: str,
    lam: float,
    seed: int,
    suite: str,
    preset: str,
    lambda_grid: Optional[str],
    reps: Optional[int],
    fmt: str,
    threads: int,
    output: Optional[Path],
) -> None:
    """Check the theorems; exit status 1 when any check fails."""
    cfg = _config(p, length, lam, kmax)
    settings = preset_settings(cfg, preset, master_seed=seed, threads=threads)
    if lambda_grid:
        grid = tuple(float(v) for v in parse_lambda_grid(lambda_grid))
        settings = RunSettings(grid, settings.reps, seed, threads, min(settings.mc_points or len(grid), len(grid)))
    if reps is not None:
        settings = RunSettings(settings.grid, reps, seed, threads, settings.mc_points)

    report = run_suite(Suite(suite), cfg, settings)
    text = report.to_json(_manifest(ctx, seed).to_dict())
    if output is not None:
        output.write_text(text + "\n")
    if fmt == "json":
        click.echo(text)
    else:
        Console().print(render_report(report))
    if not report.passed:
        ctx.exit(EXIT_VERIFY_FAILED)


@main.command()
@model_options(kmax_default="inf")
@click.option("--x0", type=float, default=1e6, show_default=True, help="Start of the sampled period.")
@click.option("--samples", type=click.IntRange(min=2), default=64, show_default=True)
@click.option("--harmonics", type=click.IntRange(min=0), default=2, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, allow_dash=True), default="-")
@click.pass_context
def profile(
    ctx: click.Context,
    p: float,
    length: float,
    kmax: str,
    lam: float,
    seed: int,
    x0: float,
    samples: int,
    harmonics: int,
    output: str,
) -> None:
    """Sample the log-periodic oscillation of the mean distance over one period."""
    cfg = _config(p, length, lam, kmax)
    estimate = asymptotic_mean_constant(cfg, harmonics=harmonics)
    result = log_periodic_profile(cfg, x0=x0, n_samples=samples, estimate=estimate)
    table = pa.table(
        {
            "log_x_mod_period": pa.array(result.log_x_mod_period, type=pa.float64()),
            "relative_oscillation": pa.array(result.relative_oscillation, type=pa.float64()),
        }
    )
    footer = [
        f"asymptotics: exponent={estimate.exponent!r} prefactor={estimate.prefactor!r} "
        f"amplitude={estimate.oscillation_amplitude!r} period={estimate.period!r}"
    ]
    with click.open_file(output, "w") as out:
        write_csv(table, out, "profile", _manifest(ctx, seed), footer)
    if output != "-":
        stderr.print(render_estimate(estimate))


@main.command()
@model_options(kmax_default="4")
@click.option(
    "--kind",
    type=click.Choice([k.value for k in NetworkKind]),
    default=NetworkKind.DETERMINISTIC.value,
    show_default=True,
)
@click.option("--output", "-o", type=click.Path(dir_okay=False, allow_dash=True), default="-")
def network(
    p: float,
    length: float,
    kmax: str,
    lam: float,
    seed: int,
    kind: str,
    output: str,
) -> None:
    """Generate a street network file."""
    cfg = _config(p, length, lam, kmax)
    if NetworkKind(kind) is NetworkKind.POISSON:
        net = generate_poisson_network(cfg, RngStream(seed, 0).generator(), seed=seed)
    else:
        net = generate_deterministic_network(cfg)
    with click.open_file(output, "w") as out:
        out.write(network_text(net))
    if output != "-":
        stderr.print(render_network(net))


if __name__ == "__main__":
    main()
