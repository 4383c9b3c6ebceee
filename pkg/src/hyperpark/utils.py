import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, TextIO

import numpy as np
import pyarrow as pa
import pyarrow.csv as pacsv

from hyperpark.errors import DomainError

SCHEMA_VERSION = 1


def format_estimate(value: float, error: float | None = None) -> str:
    """
    Format a value with its error for display.

    Parameters
    ----------
        value: Estimate
        error: Standard error or truncation bound

    Returns
    -------
        str: Formatted string (e.g., "0.123457 ± 1.20e-03")
    """
    if not math.isfinite(value):
        return str(value)
    if error is None:
        return f"{value:.6g}"
    return f"{value:.6g} ± {error:.2e}"


def parse_lambda_grid(text: str) -> np.ndarray:
    """
    Parse a ``start:ratio:count`` geometric grid.

    Parameters
    ----------
        text: Grid description

    Returns
    -------
        np.ndarray: start * ratio^n for n = 0..count-1

    Raises
    ------
        DomainError: On malformed text or nonpositive values
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"expected start:ratio:count, got {text!r}")
    try:
        start, ratio, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise DomainError(f"expected start:ratio:count, got {text!r}") from e
    if start < 0.0 or ratio <= 0.0 or count < 1:
        raise DomainError(f"grid needs start >= 0, ratio > 0 and count >= 1, got {text!r}")
    return start * ratio ** np.arange(count, dtype=float)


@dataclass(frozen=True)
class RunManifest:
    """Parameters that reproduce an output file."""

    subcommand: str
    parameters: dict[str, Any]
    master_seed: int | None
    version: str
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict[str, Any]:
        """
        Plain data, without the thread count.

        Returns
        -------
            dict[str, Any]: Manifest fields
        """
        params = {k: v for k, v in sorted(self.parameters.items()) if k != "threads"}
        return {
            "subcommand": self.subcommand,
            "parameters": params,
            "master_seed": self.master_seed,
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        """Single-line JSON."""
        return json.dumps(self.to_dict(), default=str, sort_keys=True)


def write_csv(
    table: pa.Table,
    out: TextIO,
    schema: str,
    manifest: RunManifest,
    footer: list[str] | None = None,
) -> None:
    """
    Write a table as CSV preceded by schema and manifest comment lines.

    Parameters
    ----------
        table: Rows to write
        out: Text stream
        schema: Schema name, e.g. ``analytic``
        manifest: Run manifest
        footer: Comment lines appended after the rows, without the leading '#'
    """
    buffer = io.BytesIO()
    pacsv.write_csv(table, buffer, pacsv.WriteOptions(include_header=False, quoting_style="none"))
    out.write(f"# schema: hyperpark.{schema}/{SCHEMA_VERSION}\n")
    out.write(f"# manifest: {manifest.to_json()}\n")
    out.write(",".join(table.column_names) + "\n")
    out.write(buffer.getvalue().decode())
    for line in footer or []:
        out.write(f"# {line}\n")
