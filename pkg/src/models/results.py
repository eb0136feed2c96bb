"""Result dataclasses produced by the cache models, the hierarchy and analysis.

Uses tuple (not list) for every sequence field so results stay hashable and
can be compared element-wise by the differential-replay harness.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from src.models.parameters import AccessOp

Slot = tuple[int, int]
"""A (set_id, way) position in a cache array."""


@dataclass(frozen=True)
class CacheLine:
    """Read-only view of one tag-store entry, including the DID/shared extension."""

    valid: bool
    dirty: bool
    tag: int
    did: int
    shared: bool
    repl_meta: int


class LookupKind(str, Enum):
    HIT = "HIT"
    MISS = "MISS"
    PERMISSION_MISS = "PERMISSION_MISS"


@dataclass(frozen=True)
class LookupResult:
    """Outcome of a tag-store probe of one set.

    PERMISSION_MISS means a tag matched but the DID/shared check refused the
    requester; ``way`` is the matching way and nothing else is revealed.
    """

    kind: LookupKind
    way: int | None = None

    @property
    def hit(self) -> bool:
        return self.kind is LookupKind.HIT

    @property
    def permission_miss(self) -> bool:
        return self.kind is LookupKind.PERMISSION_MISS


@dataclass(frozen=True)
class EvictionInfo:
    """Previous occupant of a filled slot, if any."""

    evicted_tag: int | None = None
    evicted_did: int | None = None
    was_dirty: bool = False
    evicted_shared: bool = False

    @property
    def evicted(self) -> bool:
        return self.evicted_tag is not None


@dataclass(frozen=True)
class FlushStats:
    """Lines invalidated by a flush and how many of them were written back."""

    lines_invalidated: int = 0
    dirty_writebacks: int = 0

    def __add__(self, other: "FlushStats") -> "FlushStats":
        return FlushStats(
            self.lines_invalidated + other.lines_invalidated,
            self.dirty_writebacks + other.dirty_writebacks,
        )


@dataclass(frozen=True)
class ChunkMapping:
    """Exclusive-mode index translation: chunk-local index to global SID."""

    sid: int
    chunk_index: int


@dataclass(frozen=True)
class AllocReceipt:
    """Result of a chunk allocation (or resize)."""

    did: int
    ch_num: int
    """Sets allocated. Always 2**index_bits."""

    index_bits: int
    sids: tuple[int, ...]
    cycles: int
    """Allocation latency: SIDs scanned + 1 EC-TABLE update (plus de-allocation on resize)."""

    flush: FlushStats


@dataclass(frozen=True)
class DeallocReceipt:
    """Result of a chunk de-allocation or a domain teardown."""

    did: int
    ch_num: int
    cycles: int
    """CH-NUM + 2 for a chunk; 0 when no chunk was held."""

    flush: FlushStats


@dataclass(frozen=True)
class LevelProbe:
    """Verdict of one cache level probed on the way to serving an access."""

    level: str
    hit: bool
    permission_miss: bool = False


@dataclass(frozen=True)
class AccessOutcome:
    """Outcome of one access, at the LLC or end-to-end through the hierarchy.

    ``hit`` is True when some cache level served the request. ``sid`` is the
    LLC set that hit or received the fill (None when a private level served
    it). ``cycles`` is the exact integer latency.
    """

    did: int
    hit: bool
    permission_miss: bool
    sid: int | None
    cycles: int
    eviction: EvictionInfo | None = None
    level: str = "L3"
    """Level that served the access: L1, L2, L3 or MEM."""

    probes: tuple[LevelProbe, ...] = ()
    writebacks: int = 0
    """Dirty private-cache victims written back while serving this access."""

    back_invalidations: int = 0
    """Private-cache lines removed to keep the hierarchy inclusive."""

    def projection(self) -> tuple[bool, int | None, int]:
        """Observable part compared by the non-interference verdict."""
        return (self.hit, self.sid, self.cycles)


@dataclass(frozen=True)
class AccessRequest:
    """Memory request as it reaches the cache: issuer, operation, metadata."""

    core: int
    did: int
    op: AccessOp
    address: int
    shared: bool = False


@dataclass(frozen=True)
class RequestMeta:
    """Security metadata stamped on every request by the trusted component."""

    did: int
    shared: bool


@dataclass(frozen=True)
class LevelCounters:
    """Counters of one (domain, level, category) cell."""

    accesses: int = 0
    hits: int = 0
    misses: int = 0
    permission_misses: int = 0
    self_evictions: int = 0
    cross_evictions_suffered: int = 0
    writebacks: int = 0

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0

    def __add__(self, other: "LevelCounters") -> "LevelCounters":
        return LevelCounters(
            *(a + b for a, b in zip(_counter_values(self), _counter_values(other)))
        )


def _counter_values(c: LevelCounters) -> tuple[int, ...]:
    return (
        c.accesses, c.hits, c.misses, c.permission_misses,
        c.self_evictions, c.cross_evictions_suffered, c.writebacks,
    )


@dataclass(frozen=True)
class DomainStats:
    """Per-domain statistics snapshot.

    ``cells`` is keyed by (level, category) with level in L1I/L1D/L2/L3 and
    category in inst/data. ``cycles`` and ``accesses`` are end-to-end totals.
    """

    did: int
    accesses: int
    cycles: int
    cells: tuple[tuple[str, str, LevelCounters], ...]

    def level(self, level: str, category: str | None = None) -> LevelCounters:
        """Counters of one level, one category or summed over categories."""
        total = LevelCounters()
        for lvl, cat, counters in self.cells:
            if lvl == level and (category is None or cat == category):
                total = total + counters
        return total


@dataclass(frozen=True)
class PhaseStats:
    """LLC counters of every domain between two BARRIER markers."""

    label: str
    domains: tuple[tuple[int, LevelCounters], ...]


@dataclass(frozen=True)
class RunStats:
    """Complete statistics snapshot of one run."""

    domains: tuple[DomainStats, ...] = ()
    eviction_matrix: tuple[tuple[int, int, int], ...] = ()
    """(evictor did, victim did, LLC evictions) sorted by (evictor, victim)."""

    phases: tuple[PhaseStats, ...] = ()

    def domain(self, did: int) -> DomainStats | None:
        for stats in self.domains:
            if stats.did == did:
                return stats
        return None


@dataclass(frozen=True)
class AmatSummary:
    """Average memory access time [cycles] as exact rationals."""

    per_domain: tuple[tuple[int, Fraction], ...]
    overall: Fraction


@dataclass(frozen=True)
class OverheadBreakdown:
    """Extra storage of the chunked controller, in exact bit counts."""

    cst_bits: int
    ectable_bits: int
    tag_extra_bits: int
    llc_capacity_bytes: int

    @property
    def total_bits(self) -> int:
        return self.cst_bits + self.ectable_bits + self.tag_extra_bits

    @property
    def total_bytes(self) -> Fraction:
        return Fraction(self.total_bits, 8)

    @property
    def pct_of_llc(self) -> Fraction:
        return self.total_bytes * 100 / self.llc_capacity_bytes


@dataclass(frozen=True)
class Verdict:
    """Non-interference verdict for one subject domain.

    On FAIL, ``index`` is the first diverging position of the subject's
    projected outcome sequence and the two values are the projections there
    (None past the end of a shorter log).
    """

    passed: bool
    subject_did: int
    compared: int
    index: int | None = None
    with_value: tuple | None = None
    without_value: tuple | None = None

    @property
    def label(self) -> str:
        return "PASS" if self.passed else "FAIL"
