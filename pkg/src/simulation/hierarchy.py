"""Inclusive three-level cache hierarchy.

Each core owns a split L1 (instruction / data) and a unified L2; all cores
share one LLC model. Private levels carry no domain checks: they belong to
whatever domain the core is running and are flushed at every context switch.

An access probes L1 -> L2 -> LLC and pays the hit latency of every level it
probes, plus the memory latency when the LLC misses. Writes are write-back
and write-allocate: a write dirties the L1 copy only, and the LLC sees the
fill as a read. Dirty data moves down when a line leaves a level:

    L1 victim    marks the L2 copy dirty
    L2 victim    back-invalidates L1 and marks the LLC copy dirty
    LLC victim   back-invalidates L1/L2 in every core that may hold it

On the chunked LLC a private copy can only belong to the domain the core
currently runs, or be a shared line, so back-invalidation targets cores whose
current did matches the evicted line (every core for shared lines). The
baselines let any domain hit on any line, so there every core is checked.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

from src.cache.array import CacheArray
from src.cache.base import LlcModel
from src.models.errors import (
    AnalysisError,
    ConfigurationError,
    DomainError,
    SchedulingError,
    SimulationError,
)
from src.models.parameters import NID, AccessOp, HierarchyConfig, IsolationMode, LevelConfig
from src.models.results import (
    AccessOutcome,
    AccessRequest,
    AmatSummary,
    FlushStats,
    LevelProbe,
    RunStats,
)
from src.simulation.domains import DomainManager

logger = logging.getLogger(__name__)


@dataclass
class CoreState:
    """Scheduling state of one core."""

    core_id: int
    current_did: int = NID


@dataclass
class _PrivateLevel:
    name: str
    config: LevelConfig
    array: CacheArray = field(init=False)

    def __post_init__(self) -> None:
        self.array = CacheArray(self.config.geometry)

    def set_of(self, line: int) -> int:
        return line & (self.config.geometry.num_sets - 1)


@dataclass
class _Core:
    state: CoreState
    l1i: _PrivateLevel
    l1d: _PrivateLevel
    l2: _PrivateLevel

    def levels(self) -> tuple[_PrivateLevel, _PrivateLevel, _PrivateLevel]:
        return (self.l1i, self.l1d, self.l2)


class CacheHierarchy:
    """Per-core private caches in front of one shared LLC model."""

    def __init__(self, config: HierarchyConfig, domains: DomainManager) -> None:
        self.config = config
        self.domains = domains
        self.llc: LlcModel = domains.llc
        self._offset_bits = self.llc.config.geometry.offset_bits
        self._cores = [
            _Core(
                CoreState(core_id),
                _PrivateLevel("L1I", config.l1i),
                _PrivateLevel("L1D", config.l1d),
                _PrivateLevel("L2", config.l2),
            )
            for core_id in range(config.num_cores)
        ]

    @property
    def private_caches(self) -> bool:
        return self.config.private_caches

    def core(self, core_id: int) -> CoreState:
        return self._core(core_id).state

    def _core(self, core_id: int) -> _Core:
        if not 0 <= core_id < len(self._cores):
            raise ConfigurationError(
                f"core {core_id} out of range [0, {len(self._cores)})", reason="CORE_RANGE"
            )
        return self._cores[core_id]

    def line_of(self, address: int) -> int:
        return address >> self._offset_bits

    # ------------------------------------------------------------------
    # Access path
    # ------------------------------------------------------------------

    def memory_access(self, core_id: int, req: AccessRequest) -> AccessOutcome:
        """Serve one request end to end, returning the total cycle count."""
        core = self._core(core_id)
        if req.did != core.state.current_did:
            raise SchedulingError(
                f"core {core_id} runs domain {core.state.current_did}, request from {req.did}"
            )
        mode = self.domains.mode_of(req.did)
        if not self.private_caches:
            return self._llc_only(req, mode)

        line = self.line_of(req.address)
        write = req.op.is_write
        l1 = core.l1i if req.op is AccessOp.IFETCH else core.l1d
        probes: list[LevelProbe] = []

        cycles = l1.config.hit_cycles
        l1_set = l1.set_of(line)
        hit = l1.array.lookup(l1_set, line, req.did, False, enforce_did=False)
        probes.append(LevelProbe(l1.name, hit.hit))
        if hit.hit:
            assert hit.way is not None
            if write:
                l1.array.set_dirty((l1_set, hit.way))
            return AccessOutcome(
                did=req.did, hit=True, permission_miss=False, sid=None, cycles=cycles,
                level="L1", probes=tuple(probes),
            )

        cycles += core.l2.config.hit_cycles
        l2_set = core.l2.set_of(line)
        l2_hit = core.l2.array.lookup(l2_set, line, req.did, False, enforce_did=False)
        probes.append(LevelProbe("L2", l2_hit.hit))
        writebacks = 0
        back_invalidations = 0
        if l2_hit.hit:
            self._fill_l1(core, l1, line, req, write)
            return AccessOutcome(
                did=req.did, hit=True, permission_miss=False, sid=None, cycles=cycles,
                level="L2", probes=tuple(probes),
            )

        llc_req = replace(req, op=AccessOp.READ) if write else req
        outcome = self.llc.access(llc_req, mode)
        probes.append(LevelProbe("L3", outcome.hit, outcome.permission_miss))
        cycles += outcome.cycles
        if not outcome.hit:
            cycles += self.config.memory_latency_cycles
        if outcome.eviction is not None and outcome.eviction.evicted:
            ev = outcome.eviction
            assert ev.evicted_tag is not None and ev.evicted_did is not None
            stats = self._back_invalidate(ev.evicted_tag, ev.evicted_did, ev.evicted_shared)
            back_invalidations += stats.lines_invalidated
            writebacks += stats.dirty_writebacks

        wb, inv = self._fill_l2(core, line, req, mode)
        writebacks += wb
        back_invalidations += inv
        self._fill_l1(core, l1, line, req, write)
        return AccessOutcome(
            did=req.did,
            hit=outcome.hit,
            permission_miss=outcome.permission_miss,
            sid=outcome.sid,
            cycles=cycles,
            eviction=outcome.eviction,
            level="L3" if outcome.hit else "MEM",
            probes=tuple(probes),
            writebacks=writebacks,
            back_invalidations=back_invalidations,
        )

    def _llc_only(self, req: AccessRequest, mode: IsolationMode) -> AccessOutcome:
        outcome = self.llc.access(req, mode)
        cycles = outcome.cycles
        if not outcome.hit:
            cycles += self.config.memory_latency_cycles
        return replace(
            outcome,
            cycles=cycles,
            level="L3" if outcome.hit else "MEM",
            probes=(LevelProbe("L3", outcome.hit, outcome.permission_miss),),
        )

    def _fill_l2(
        self, core: _Core, line: int, req: AccessRequest, mode: IsolationMode
    ) -> tuple[int, int]:
        """Install the line in L2; returns (write-backs, back-invalidations)."""
        l2 = core.l2
        set_id = l2.set_of(line)
        slot = l2.array.select_victim(l2.array.set_slots([set_id]))
        victim = l2.array.fill(slot, line, req.did, req.shared, False)
        if not victim.evicted:
            return 0, 0
        assert victim.evicted_tag is not None
        dirty = victim.was_dirty
        removed = 0
        for l1 in (core.l1i, core.l1d):
            stats = l1.array.invalidate_tag(l1.set_of(victim.evicted_tag), victim.evicted_tag)
            removed += stats.lines_invalidated
            dirty = dirty or stats.dirty_writebacks > 0
        if dirty:
            self.llc.mark_dirty(
                AccessRequest(
                    core=core.state.core_id,
                    did=req.did,
                    op=AccessOp.WRITE,
                    address=victim.evicted_tag << self._offset_bits,
                    shared=victim.evicted_shared,
                ),
                mode,
            )
            return 1, removed
        return 0, removed

    def _fill_l1(
        self, core: _Core, l1: _PrivateLevel, line: int, req: AccessRequest, write: bool
    ) -> None:
        set_id = l1.set_of(line)
        slot = l1.array.select_victim(l1.array.set_slots([set_id]))
        victim = l1.array.fill(slot, line, req.did, req.shared, write)
        if victim.evicted and victim.was_dirty:
            assert victim.evicted_tag is not None
            l2 = core.l2
            l2_slot = l2.array.find([l2.set_of(victim.evicted_tag)], victim.evicted_tag)
            if l2_slot is not None:
                l2.array.set_dirty(l2_slot)

    def _back_invalidate(self, tag: int, did: int, shared: bool) -> FlushStats:
        """Remove an LLC victim from the private caches that may hold it."""
        total = FlushStats()
        owned_only = self.llc.enforces_did and not shared
        for core in self._cores:
            if owned_only and core.state.current_did != did:
                continue
            for level in core.levels():
                total = total + level.array.invalidate_tag(level.set_of(tag), tag)
        return total

    def apply_llc_removals(self) -> dict[tuple[int, str], FlushStats]:
        """Back-invalidate lines the LLC dropped through chunk flushes or purges.

        Returns the flushed lines per (owner did, level): ``L3`` for the LLC
        copies, ``L2`` for private copies removed along with them.
        """
        flushed: dict[tuple[int, str], FlushStats] = {}
        for tag, did, shared, dirty in self.llc.drain_removed():
            key = (did, "L3")
            flushed[key] = flushed.get(key, FlushStats()) + FlushStats(1, int(dirty))
            if self.private_caches:
                private = self._back_invalidate(tag, did, shared)
                if private.lines_invalidated:
                    key = (did, "L2")
                    flushed[key] = flushed.get(key, FlushStats()) + private
        return flushed

    # ------------------------------------------------------------------
    # Scheduling
    # ------------------------------------------------------------------

    def context_switch(self, core_id: int, new_did: int) -> FlushStats:
        """Write back and flush the core's private caches, then switch domains."""
        core = self._core(core_id)
        if not self.domains.is_registered(new_did):
            raise DomainError("UNREGISTERED_DOMAIN", f"domain {new_did} is not registered")
        old_did = core.state.current_did
        dirty = {
            (tag, shared)
            for level in core.levels()
            for tag, _, shared in level.array.dirty_lines()
        }
        if self.domains.is_registered(old_did):
            mode = self.domains.mode_of(old_did)
            for tag, shared in sorted(dirty):
                self.llc.mark_dirty(
                    AccessRequest(
                        core=core_id, did=old_did, op=AccessOp.WRITE,
                        address=tag << self._offset_bits, shared=shared,
                    ),
                    mode,
                )
        flush = FlushStats()
        for level in core.levels():
            flush = flush + level.array.invalidate_all()
        core.state.current_did = new_did
        logger.debug("core %d: domain %d -> %d", core_id, old_did, new_did)
        # a line dirty in both L1 and L2 is written back once
        return FlushStats(flush.lines_invalidated, len(dirty))

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def check_inclusion(self) -> None:
        """Every valid private line must be present in the LLC (full scan)."""
        llc_tags = set(self.llc.array.valid_tags())
        for core in self._cores:
            for level in core.levels():
                missing = set(level.array.valid_tags()) - llc_tags
                if missing:
                    raise SimulationError(
                        "INVARIANT",
                        f"core {core.state.core_id} {level.name} holds "
                        f"{len(missing)} lines absent from the LLC",
                    )


def amat(stats: RunStats) -> AmatSummary:
    """Average memory access time per domain and overall, as exact rationals."""
    per_domain = tuple(
        (d.did, Fraction(d.cycles, d.accesses)) for d in stats.domains if d.accesses
    )
    accesses = sum(d.accesses for d in stats.domains)
    if accesses == 0:
        raise AnalysisError("no accesses recorded")
    cycles = sum(d.cycles for d in stats.domains)
    return AmatSummary(per_domain=per_domain, overall=Fraction(cycles, accesses))
