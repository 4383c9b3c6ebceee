"""Rich renderables for summaries, reports and networks."""

from rich.console import Group
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from hyperpark.analytics.mellin import AsymptoticEstimate
from hyperpark.experiments.verify import VerificationReport
from hyperpark.report.common import create_column_grid, results_table
from hyperpark.sim.montecarlo import MonteCarloSummary
from hyperpark.sim.network import Orientation, StreetNetwork
from hyperpark.utils import format_estimate

# Histogram bars wider than this are scaled down.
BAR_WIDTH = 40


def _histogram(counts: list[int]) -> Text:
    text = Text()
    peak = max(counts) if counts else 0
    for level, count in enumerate(counts):
        if count == 0:
            continue
        width = max(1, round(BAR_WIDTH * count / peak))
        text.append(f"{level:>3} ", style="bold")
        text.append("█" * width, style="green")
        text.append(f" {count}\n", style="dim")
    return text


def render_summary(summary: MonteCarloSummary, title: str = "Monte Carlo") -> Panel:
    """
    Render a replication summary next to its final-level histogram.

    Parameters
    ----------
        summary: Aggregated replications
        title: Panel title

    Returns
    -------
        Panel: Statistics and histogram
    """
    stats = Text()
    stats.append("Replications: ", style="bold")
    stats.append(f"{summary.reps:,}\n")
    stats.append("Mean distance: ", style="bold")
    stats.append(f"{format_estimate(summary.mean, summary.se)}\n")
    stats.append("Variance: ", style="bold")
    stats.append(f"{format_estimate(summary.variance, summary.variance_se)}\n")
    stats.append("Parked: ", style="bold")
    stats.append(f"{summary.parked_fraction:.1%}\n")
    if summary.exit_rate > 0:
        stats.append("Exited: ", style="bold")
        stats.append(f"{summary.exit_rate:.1%}\n", style="yellow")

    grid = create_column_grid(num_columns=2)
    grid.add_row(
        Panel(stats, title="[cyan]Distance[/cyan]", border_style="dim"),
        Panel(
            _histogram([int(c) for c in summary.turn_histogram]),
            title="[cyan]Final level[/cyan]",
            border_style="dim",
        ),
    )
    return Panel(grid, title=f"[green]{title}[/green]", border_style="green")


def render_report(report: VerificationReport) -> Table:
    """
    Render every check of a report as one row.

    Parameters
    ----------
        report: Verification report

    Returns
    -------
        Table: Name, status, observed, expected and tolerance
    """
    status = "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]"
    table = results_table(f"Suite {report.suite}: {status}", ["check", "status", "observed", "expected", "tolerance"])
    for check in report.checks:
        table.add_row(
            check.name,
            "[green]pass[/green]" if check.passed else "[red]fail[/red]",
            f"{check.observed:.6g}",
            f"{check.expected:.6g}",
            f"{check.tolerance:.2g}",
        )
    return table


def render_estimate(estimate: AsymptoticEstimate) -> Panel:
    """
    Render the leading asymptotic constant.

    Parameters
    ----------
        estimate: Asymptotic estimate

    Returns
    -------
        Panel: Exponent, prefactor, amplitude and period
    """
    text = Text()
    text.append("Exponent: ", style="bold")
    text.append(f"{estimate.exponent:.10g}\n")
    text.append("Prefactor: ", style="bold")
    text.append(f"{estimate.prefactor:.10g}\n")
    text.append("Oscillation amplitude: ", style="bold")
    text.append(f"{estimate.oscillation_amplitude:.3e}\n")
    text.append("Period: ", style="bold")
    text.append(f"{estimate.period:.10g}")
    return Panel(text, title="[yellow]Asymptotics[/yellow]", border_style="yellow")


def render_network(network: StreetNetwork) -> Group:
    """
    Render street counts per level.

    Parameters
    ----------
        network: Street network

    Returns
    -------
        Group: Heading and count table
    """
    heading = Text()
    heading.append(f"{network.kind.value.capitalize()} network, ", style="bold")
    heading.append(f"k_max={network.k_max}, {network.total_streets:,} streets")
    table = results_table("Streets per level", ["level", "vertical", "horizontal", "intensity"])
    for k in range(network.k_max + 1):
        table.add_row(
            str(k),
            str(len(network.coordinates(Orientation.VERTICAL, k))),
            str(len(network.coordinates(Orientation.HORIZONTAL, k))),
            f"{network.intensities[k]:.6g}",
        )
    return Group(heading, table)
