"""Plot a chunksim CSV report as standalone HTML charts.

Reads the ``phases`` and ``eviction_matrix`` sections back out of a report
written by ``chunksim sim`` and writes one self-contained HTML file per
chart, so they open without a server:

    python -m scripts.plot_report results/sim_shared.csv --out results/plots
"""

from __future__ import annotations

import argparse
import io
import sys
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
import plotly.graph_objects as go

# Common layout settings shared by every chart
_COMMON_LAYOUT = dict(
    template="plotly_white",
    hovermode="x unified",
    height=400,
    legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
)


def read_section(report: str, name: str) -> pd.DataFrame:
    """One ``# [name]`` section of a CSV report as a DataFrame.

    Raises:
        KeyError: If the report has no such section.
    """
    marker = f"# [{name}]"
    lines = report.splitlines()
    if marker not in lines:
        raise KeyError(f"report has no {marker} section")
    start = lines.index(marker) + 1
    end = next(
        (i for i in range(start, len(lines)) if lines[i].startswith("# [")), len(lines)
    )
    return pd.read_csv(io.StringIO("\n".join(lines[start:end])))


def phase_figure(phases: pd.DataFrame) -> go.Figure:
    """LLC miss rate per phase, one line per domain, phases in report order."""
    order = list(dict.fromkeys(phases["phase"]))
    fig = go.Figure()
    for did, rows in phases.groupby("did", sort=True):
        rows = rows.set_index("phase").reindex(order)
        fig.add_trace(
            go.Scatter(x=order, y=rows["miss_rate"], mode="lines+markers", name=f"D{did}")
        )
    fig.update_layout(
        title="LLC miss rate per phase",
        xaxis_title="Phase",
        yaxis_title="Miss rate",
        yaxis=dict(range=[0, 1.05]),
        **_COMMON_LAYOUT,
    )
    return fig


def eviction_figure(matrix: pd.DataFrame) -> go.Figure:
    """Heatmap of LLC evictions, evictor domain by victim domain."""
    if matrix.empty:
        z, victims, evictors = [], [], []
    else:
        table = matrix.pivot_table(
            index="evictor", columns="victim", values="evictions", aggfunc="sum", fill_value=0
        )
        z, victims, evictors = table.to_numpy(), list(table.columns), list(table.index)
    fig = go.Figure(
        go.Heatmap(
            z=z,
            x=[f"D{v}" for v in victims],
            y=[f"D{e}" for e in evictors],
            colorscale="Greens",
            colorbar=dict(title="Evictions"),
        )
    )
    fig.update_layout(
        title="LLC evictions by domain",
        xaxis_title="Victim",
        yaxis_title="Evictor",
        **{**_COMMON_LAYOUT, "hovermode": "closest"},
    )
    return fig


def write_charts(report_path: Path, out_dir: Path) -> list[Path]:
    """Write the phase and eviction charts of one report; returns the HTML paths."""
    report = report_path.read_text()
    figures = {
        "phases": phase_figure(read_section(report, "phases")),
        "evictions": eviction_figure(read_section(report, "eviction_matrix")),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fig in figures.items():
        path = out_dir / f"{report_path.stem}_{name}.html"
        fig.write_html(path, include_plotlyjs=True, full_html=True)
        written.append(path)
    return written


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Plot a chunksim CSV report")
    parser.add_argument("report", type=Path, help="CSV report written by chunksim sim")
    parser.add_argument("--out", type=Path, help="Output directory (default: next to the report)")
    args = parser.parse_args(argv)
    try:
        paths = write_charts(args.report, args.out or args.report.parent)
    except (OSError, KeyError) as exc:
        print(f"plot_report: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
