"""Report emission for replayed runs.

CSV reports are a sequence of sections. Each section starts with a
``# [name]`` marker line followed by a header row and its data rows, so a
single section can be read with pd.read_csv(comment='#') after slicing.
Sections and columns always appear in the same order; an empty run yields
the markers and header rows only.

    domain_stats        per (did, level, category) counters
    miss_rate_summary   LLC miss rate per category plus the arithmetic and
                        geometric means over categories
    amat                average memory access time per domain and overall
    eviction_matrix     LLC evictions per (evictor, victim) pair
    phases              LLC counters per BARRIER phase
    overhead            storage overhead breakdown (only when supplied)

Floats are rendered with a fixed number of decimals so that identical
statistics always give byte-identical text.
"""

import csv
import io
import json
from typing import Any

from src.analysis.overhead import bits_to_kb
from src.analysis.stats import (
    LLC_LEVEL,
    arithmetic_mean_miss_rate,
    category_miss_rates,
    geometric_mean_miss_rate,
)
from src.models.results import OverheadBreakdown, RunStats
from src.simulation.hierarchy import amat

_COUNTERS = (
    "accesses",
    "hits",
    "misses",
    "permission_misses",
    "self_evictions",
    "cross_evictions_suffered",
    "writebacks",
)


def _rate(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def _summary_rows(stats: RunStats) -> list[list[Any]]:
    rows = []
    for domain in stats.domains:
        rates = category_miss_rates(domain, LLC_LEVEL)
        if not rates:
            continue
        rows.append([
            domain.did,
            _rate(rates.get("inst")),
            _rate(rates.get("data")),
            _rate(arithmetic_mean_miss_rate(rates)),
            _rate(geometric_mean_miss_rate(rates)),
        ])
    return rows


def _amat_rows(stats: RunStats) -> list[list[Any]]:
    if not any(d.accesses for d in stats.domains):
        return []
    summary = amat(stats)
    by_did = dict(summary.per_domain)
    rows: list[list[Any]] = [
        [d.did, d.accesses, d.cycles, f"{float(by_did[d.did]):.4f}"]
        for d in stats.domains
        if d.accesses
    ]
    rows.append([
        "all",
        sum(d.accesses for d in stats.domains),
        sum(d.cycles for d in stats.domains),
        f"{float(summary.overall):.4f}",
    ])
    return rows


def _overhead_rows(overhead: OverheadBreakdown) -> list[list[Any]]:
    parts = (
        ("cst", overhead.cst_bits),
        ("ectable", overhead.ectable_bits),
        ("tag_extra", overhead.tag_extra_bits),
        ("total", overhead.total_bits),
    )
    rows: list[list[Any]] = [
        [name, bits, f"{float(bits_to_kb(bits)):.2f}"] for name, bits in parts
    ]
    rows.append(["pct_of_llc", "", f"{float(overhead.pct_of_llc):.2f}"])
    return rows


def _sections(
    stats: RunStats, overhead: OverheadBreakdown | None
) -> list[tuple[str, list[str], list[list[Any]]]]:
    domain_rows = [
        [d.did, level, category, *(getattr(c, name) for name in _COUNTERS), _rate(c.miss_rate)]
        for d in stats.domains
        for level, category, c in d.cells
    ]
    phase_rows = [
        [phase.label, did, c.accesses, c.misses, _rate(c.miss_rate)]
        for phase in stats.phases
        for did, c in phase.domains
    ]
    sections = [
        ("domain_stats", ["did", "level", "category", *_COUNTERS, "miss_rate"], domain_rows),
        (
            "miss_rate_summary",
            ["did", "inst_miss_rate", "data_miss_rate", "arithmetic_mean", "geometric_mean"],
            _summary_rows(stats),
        ),
        ("amat", ["did", "accesses", "cycles", "amat"], _amat_rows(stats)),
        (
            "eviction_matrix",
            ["evictor", "victim", "evictions"],
            [list(entry) for entry in stats.eviction_matrix],
        ),
        ("phases", ["phase", "did", "accesses", "misses", "miss_rate"], phase_rows),
    ]
    if overhead is not None:
        sections.append(("overhead", ["component", "bits", "kb"], _overhead_rows(overhead)))
    return sections


def emit_report(
    stats: RunStats,
    fmt: str = "csv",
    model: str | None = None,
    overhead: OverheadBreakdown | None = None,
) -> str:
    """Render a statistics snapshot as ``csv`` or ``json`` text."""
    sections = _sections(stats, overhead)
    if fmt == "json":
        data: dict[str, Any] = {"model": model}
        for name, header, rows in sections:
            data[name] = [dict(zip(header, row)) for row in rows]
        return json.dumps(data, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")

    buf = io.StringIO()
    buf.write("# chunkcache-simulator report\n")
    if model is not None:
        buf.write(f"# model: {model}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for name, header, rows in sections:
        buf.write(f"# [{name}]\n")
        writer.writerow(header)
        writer.writerows(rows)
    return buf.getvalue()


def format_overhead(overhead: OverheadBreakdown, title: str = "Storage overhead") -> str:
    """Human-readable overhead table with KB and percent to two decimals."""
    lines = [title]
    for label, bits in (
        ("CST", overhead.cst_bits),
        ("EC-TABLE", overhead.ectable_bits),
        ("Tag extension", overhead.tag_extra_bits),
        ("Total", overhead.total_bits),
    ):
        lines.append(f"  {label:<14}{bits:>12,} bits {float(bits_to_kb(bits)):>10.2f} KB")
    capacity = overhead.llc_capacity_bytes
    size = f"{capacity >> 20} MB" if capacity >= 1 << 20 else f"{capacity / 1024:g} KB"
    lines.append(f"  {'LLC share':<14}{float(overhead.pct_of_llc):>22.2f} % of {size}")
    return "\n".join(lines) + "\n"
