"""Statistics aggregation for replayed runs.

Counters are kept per (domain, level, category). Levels are the probe names
reported by the hierarchy (L1I, L1D, L2, L3); categories are ``inst`` for
instruction fetches and ``data`` for reads and writes. Every access counts
once in each level it probed, so at every level hits + misses = accesses.
Write-backs from flushes (chunk release, domain purge, context switch) are
booked under the owning domain in the ``data`` category, at L3 for LLC
copies and at L2 for private copies.

LLC evictions are attributed to the pair (evictor did, victim did). A pair
with equal dids is a self eviction of the evictor; any other pair counts as a
cross eviction suffered by the victim. Victim cells are booked under the
``data`` category since the victim's access category is not known.

Phase snapshots hold LLC counters only. ``close_phase`` closes the running
phase under the BARRIER label that ended it.
"""

from dataclasses import dataclass, fields

from scipy.stats import gmean

from src.models.errors import AnalysisError
from src.models.parameters import AccessOp
from src.models.results import (
    AccessOutcome,
    DomainStats,
    FlushStats,
    LevelCounters,
    PhaseStats,
    RunStats,
)

LLC_LEVEL = "L3"
CATEGORIES = ("inst", "data")


@dataclass
class _Cell:
    accesses: int = 0
    hits: int = 0
    misses: int = 0
    permission_misses: int = 0
    self_evictions: int = 0
    cross_evictions_suffered: int = 0
    writebacks: int = 0

    def freeze(self) -> LevelCounters:
        return LevelCounters(**{f.name: getattr(self, f.name) for f in fields(self)})


class StatsCollector:
    """Mutable accumulator; ``snapshot`` returns a frozen ``RunStats``."""

    def __init__(self) -> None:
        self._cells: dict[tuple[int, str, str], _Cell] = {}
        self._totals: dict[int, list[int]] = {}
        self._matrix: dict[tuple[int, int], int] = {}
        self._phase: dict[int, _Cell] = {}
        self._phases: list[PhaseStats] = []

    def _cell(self, did: int, level: str, category: str) -> _Cell:
        key = (did, level, category)
        cell = self._cells.get(key)
        if cell is None:
            cell = self._cells[key] = _Cell()
        return cell

    def record_access(self, did: int, op: AccessOp, outcome: AccessOutcome) -> None:
        category = op.category
        totals = self._totals.setdefault(did, [0, 0])
        totals[0] += 1
        totals[1] += outcome.cycles

        for probe in outcome.probes:
            cell = self._cell(did, probe.level, category)
            cell.accesses += 1
            if probe.hit:
                cell.hits += 1
            else:
                cell.misses += 1
                if probe.permission_miss:
                    cell.permission_misses += 1
            if probe.level == LLC_LEVEL:
                phase = self._phase.setdefault(did, _Cell())
                phase.accesses += 1
                if probe.hit:
                    phase.hits += 1
                else:
                    phase.misses += 1
                    phase.permission_misses += int(probe.permission_miss)

        if outcome.writebacks:
            self._cell(did, "L2", category).writebacks += outcome.writebacks

        eviction = outcome.eviction
        if eviction is not None and eviction.evicted:
            assert eviction.evicted_did is not None
            victim = eviction.evicted_did
            key = (did, victim)
            self._matrix[key] = self._matrix.get(key, 0) + 1
            if victim == did:
                self._cell(did, LLC_LEVEL, category).self_evictions += 1
            else:
                self._cell(victim, LLC_LEVEL, "data").cross_evictions_suffered += 1
            if eviction.was_dirty:
                self._cell(victim, LLC_LEVEL, "data").writebacks += 1

    def record_flush(self, did: int, level: str, flush: FlushStats) -> None:
        """Book the write-backs of a flush (chunk release, purge, context switch)."""
        if flush.dirty_writebacks:
            self._cell(did, level, "data").writebacks += flush.dirty_writebacks

    def close_phase(self, label: str) -> PhaseStats:
        phase = PhaseStats(
            label=label,
            domains=tuple((did, cell.freeze()) for did, cell in sorted(self._phase.items())),
        )
        self._phases.append(phase)
        self._phase = {}
        return phase

    @property
    def phase_open(self) -> bool:
        return bool(self._phase)

    def snapshot(self) -> RunStats:
        domains = []
        for did in sorted(set(self._totals) | {k[0] for k in self._cells}):
            accesses, cycles = self._totals.get(did, [0, 0])
            cells = tuple(
                (level, category, cell.freeze())
                for (d, level, category), cell in sorted(self._cells.items())
                if d == did
            )
            domains.append(DomainStats(did=did, accesses=accesses, cycles=cycles, cells=cells))
        return RunStats(
            domains=tuple(domains),
            eviction_matrix=tuple(
                (evictor, victim, n) for (evictor, victim), n in sorted(self._matrix.items())
            ),
            phases=tuple(self._phases),
        )


def category_miss_rates(stats: DomainStats, level: str = LLC_LEVEL) -> dict[str, float]:
    """Raw miss rate of every category the domain touched at ``level``."""
    rates = {}
    for category in CATEGORIES:
        counters = stats.level(level, category)
        if counters.accesses:
            rates[category] = counters.miss_rate
    return rates


def arithmetic_mean_miss_rate(rates: dict[str, float]) -> float:
    """Arithmetic mean over the instruction and data miss rates."""
    if not rates:
        raise AnalysisError("no categories with accesses")
    return sum(rates.values()) / len(rates)


def geometric_mean_miss_rate(rates: dict[str, float]) -> float:
    """Geometric mean over categories; 0.0 as soon as one rate is zero."""
    if not rates:
        raise AnalysisError("no categories with accesses")
    values = list(rates.values())
    if min(values) == 0.0:
        return 0.0
    return float(gmean(values))


def phase_miss_rate(stats: RunStats, label: str, did: int) -> float:
    """LLC miss rate of one domain in the phase closed by ``label``."""
    for phase in stats.phases:
        if phase.label == label:
            for phase_did, counters in phase.domains:
                if phase_did == did:
                    return counters.miss_rate
            return 0.0
    raise AnalysisError(f"no phase labelled {label!r}")


def phase_misses(stats: RunStats, label: str, did: int) -> int:
    """LLC misses of one domain in the phase closed by ``label``."""
    for phase in stats.phases:
        if phase.label == label:
            return sum(c.misses for d, c in phase.domains if d == did)
    raise AnalysisError(f"no phase labelled {label!r}")
