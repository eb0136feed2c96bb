"""Chunked-Cache LLC controller.

The LLC's sets are split into the NI-D principal chunk (SIDs 0..P-1, wired
to the OS) and a pool the controller hands out to isolated domains (I-Ds) as
power-of-two chunks. Each chunk behaves like a standalone set-associative
cache: the low INDEX bits of the line address select an entry of the
domain's SID-VEC.

Access routing:
    mainstream path   NI-D requests, MAINSTREAM-mode domains and requests to
                      shared regions. The principal set and every still
                      unallocated congruent set (principal + k*P) are probed
                      as one logical lookup; a miss fills the victim chosen
                      over the union of their ways. base + 2 cycles.
    exclusive path    Non-shared requests of an EXCLUSIVE domain. One set,
                      sid_vec[line mod 2**index_bits]; the victim is picked
                      inside that set only. base + 1 cycles.

Allocation scans the CST upwards from P, claims the first free sets and
invalidates them; de-allocation clears the CST bits and the EC-TABLE row and
invalidates the sets again. Both validate before mutating state.
"""

import logging

from src.analysis.latency import (
    alloc_latency,
    dealloc_latency,
    exclusive_latency,
    mainstream_latency,
)
from src.cache.array import CacheArray
from src.cache.tables import ChunkTable, SetStatusTable
from src.models.errors import AllocationError, DomainError, SimulationError
from src.models.parameters import NID, ControllerConfig, IsolationMode, is_power_of_two
from src.models.results import (
    AccessOutcome,
    AccessRequest,
    AllocReceipt,
    ChunkMapping,
    DeallocReceipt,
    FlushStats,
)

logger = logging.getLogger(__name__)


def format_sid_ranges(sids: list[int] | tuple[int, ...]) -> str:
    """Compact rendering of a SID list: ``8-11,14``."""
    if not sids:
        return "-"
    parts = []
    start = prev = sids[0]
    for sid in list(sids[1:]) + [None]:
        if sid is not None and sid == prev + 1:
            prev = sid
            continue
        parts.append(str(start) if start == prev else f"{start}-{prev}")
        if sid is not None:
            start = prev = sid
    return ",".join(parts)


class ChunkedController:
    """Chunked-Cache LLC: CST, EC-TABLE and the access-control flow."""

    name = "chunked"
    enforces_did = True

    def __init__(self, config: ControllerConfig) -> None:
        self.config = config
        self.array = CacheArray(config.geometry, track_removals=True)
        self.cst = SetStatusTable(config.geometry.num_sets)
        self.table = ChunkTable(config.max_domains, config.max_sets_per_domain)
        self._enabled: set[int] = {NID}
        self._offset_bits = config.geometry.offset_bits

    @property
    def principal_sets(self) -> int:
        return self.config.principal_sets

    def line_of(self, address: int) -> int:
        return address >> self._offset_bits

    # ------------------------------------------------------------------
    # Configuration registers
    # ------------------------------------------------------------------

    def enable_domain(self, did: int) -> None:
        self._enabled.add(did)

    def disable_domain(self, did: int) -> None:
        if did != NID:
            self._enabled.discard(did)

    def is_enabled(self, did: int) -> bool:
        return did in self._enabled

    def has_chunk(self, did: int) -> bool:
        return did != NID and 0 < did < self.config.max_domains and self.table.row(did).alloc

    # ------------------------------------------------------------------
    # Chunk management
    # ------------------------------------------------------------------

    def _validate_size(self, did: int, ch_num: int) -> None:
        if ch_num < 1 or not is_power_of_two(ch_num):
            raise AllocationError("NOT_POWER_OF_TWO", f"domain {did}: {ch_num} sets")
        if ch_num > self.config.max_sets_per_domain:
            raise AllocationError(
                "EXCEEDS_MAX",
                f"domain {did}: {ch_num} sets > cap {self.config.max_sets_per_domain}",
            )

    def _validate_did(self, did: int) -> None:
        if not 0 < did < self.config.max_domains:
            raise AllocationError(
                "INVALID_DOMAIN", f"domain {did} outside 1..{self.config.max_domains - 1}"
            )

    def allocate_chunk(self, did: int, ch_num: int) -> AllocReceipt:
        """Claim ``ch_num`` free sets for ``did``, scanning upwards from P."""
        self._validate_did(did)
        if self.table.row(did).alloc:
            raise AllocationError("ALREADY_ALLOCATED", f"domain {did} already holds a chunk")
        self._validate_size(did, ch_num)

        found = self.cst.scan_free(self.principal_sets, ch_num)
        if found is None:
            raise AllocationError(
                "INSUFFICIENT_FREE_SETS",
                f"domain {did}: {ch_num} sets requested, "
                f"{self.cst.free_count(self.principal_sets)} free",
            )
        sids, scanned = found
        self.cst.claim(sids)
        entry = self.table.write(did, sids)
        flush = self.array.invalidate_sets(sids)
        receipt = AllocReceipt(
            did=did,
            ch_num=ch_num,
            index_bits=entry.index_bits,
            sids=entry.sid_vec,
            cycles=alloc_latency(ch_num, scanned),
            flush=flush,
        )
        logger.info(
            "allocated %d sets (%s) to domain %d in %d cycles, flushed %d lines",
            ch_num, format_sid_ranges(entry.sid_vec), did, receipt.cycles,
            flush.lines_invalidated,
        )
        self.check_invariants()
        return receipt

    def deallocate_chunk(self, did: int) -> DeallocReceipt:
        """Release the chunk of ``did``, flushing its sets."""
        self._validate_did(did)
        entry = self.table.row(did)
        if not entry.alloc:
            raise AllocationError("NOT_ALLOCATED", f"domain {did} holds no chunk")
        self.table.clear(did)
        sids = list(entry.sid_vec)
        self.cst.release(sids)
        flush = self.array.invalidate_sets(sids)
        receipt = DeallocReceipt(
            did=did, ch_num=entry.ch_num, cycles=dealloc_latency(entry.ch_num), flush=flush
        )
        logger.info(
            "released %d sets of domain %d in %d cycles, %d dirty write-backs",
            entry.ch_num, did, receipt.cycles, flush.dirty_writebacks,
        )
        self.check_invariants()
        return receipt

    def resize_chunk(self, did: int, new_ch_num: int) -> AllocReceipt:
        """De-allocate then allocate.

        Arguments are checked first. If the new allocation then fails with
        INSUFFICIENT_FREE_SETS, the old chunk has already been released.
        """
        self._validate_did(did)
        if not self.table.row(did).alloc:
            raise AllocationError("NOT_ALLOCATED", f"domain {did} holds no chunk")
        self._validate_size(did, new_ch_num)
        released = self.deallocate_chunk(did)
        allocated = self.allocate_chunk(did, new_ch_num)
        return AllocReceipt(
            did=did,
            ch_num=allocated.ch_num,
            index_bits=allocated.index_bits,
            sids=allocated.sids,
            cycles=released.cycles + allocated.cycles,
            flush=released.flush + allocated.flush,
        )

    # ------------------------------------------------------------------
    # Indexing
    # ------------------------------------------------------------------

    def map_exclusive(self, did: int, line_addr: int) -> ChunkMapping:
        """Chunk-local index from the low INDEX bits, translated through the SID-VEC."""
        self._validate_did(did)
        entry = self.table.row(did)
        if not entry.alloc:
            raise AllocationError("NOT_ALLOCATED", f"domain {did} holds no chunk")
        chunk_index = line_addr & ((1 << entry.index_bits) - 1)
        return ChunkMapping(sid=entry.sid_vec[chunk_index], chunk_index=chunk_index)

    def mainstream_candidates(self, line_addr: int) -> list[int]:
        """Principal set plus every unallocated congruent set, ascending."""
        p = self.principal_sets
        principal = line_addr & (p - 1)
        return [principal] + [
            sid
            for sid in range(principal + p, self.config.geometry.num_sets, p)
            if not self.cst.is_allocated(sid)
        ]

    def mainstream_sets(self) -> list[int]:
        """Every set the NI-D may currently use."""
        allocated = set(self.cst.allocated())
        return [s for s in range(self.config.geometry.num_sets) if s not in allocated]

    # ------------------------------------------------------------------
    # Access
    # ------------------------------------------------------------------

    def _uses_mainstream(self, req: AccessRequest, mode: IsolationMode) -> bool:
        return req.did == NID or mode is IsolationMode.MAINSTREAM or req.shared

    def _check_request(self, req: AccessRequest, mode: IsolationMode) -> None:
        if req.did not in self._enabled:
            raise DomainError("UNREGISTERED_DOMAIN", f"domain {req.did} is not registered")
        if not self._uses_mainstream(req, mode) and not self.has_chunk(req.did):
            raise DomainError(
                "EXCLUSIVE_WITHOUT_CHUNK", f"exclusive domain {req.did} holds no chunk"
            )

    def access(self, req: AccessRequest, mode: IsolationMode) -> AccessOutcome:
        """Serve one LLC request along the mainstream or exclusive path."""
        self._check_request(req, mode)
        tag = self.line_of(req.address)
        write = req.op.is_write
        is_nid = req.did == NID

        if self._uses_mainstream(req, mode):
            sets = self.mainstream_candidates(tag)
            cycles = mainstream_latency(self.config)
        else:
            sets = [self.map_exclusive(req.did, tag).sid]
            cycles = exclusive_latency(self.config)

        permission_miss = False
        for sid in sets:
            result = self.array.lookup(sid, tag, req.did, is_nid)
            if result.hit:
                assert result.way is not None
                if write:
                    self.array.set_dirty((sid, result.way))
                return AccessOutcome(
                    did=req.did, hit=True, permission_miss=False, sid=sid, cycles=cycles
                )
            permission_miss = permission_miss or result.permission_miss

        slot = self.array.select_victim(self.array.set_slots(sets))
        eviction = self.array.fill(slot, tag, req.did, req.shared, write)
        return AccessOutcome(
            did=req.did,
            hit=False,
            permission_miss=permission_miss,
            sid=slot[0],
            cycles=cycles,
            eviction=eviction,
        )

    def mark_dirty(self, req: AccessRequest, mode: IsolationMode) -> bool:
        """Mark the LLC copy a request would reach as dirty (private write-back)."""
        tag = self.line_of(req.address)
        if self._uses_mainstream(req, mode):
            sets = self.mainstream_candidates(tag)
        elif self.has_chunk(req.did):
            sets = [self.map_exclusive(req.did, tag).sid]
        else:
            return False
        slot = self.array.find(sets, tag, req.did, shared_ok=req.did == NID)
        if slot is None:
            return False
        self.array.set_dirty(slot)
        return True

    def purge_domain(self, did: int) -> FlushStats:
        """Invalidate lines of ``did`` left in mainstream sets."""
        return self.array.invalidate_owned(did, self.mainstream_sets())

    def drain_removed(self) -> list[tuple[int, int, bool, bool]]:
        return self.array.drain_removed()

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    def check_invariants(self) -> None:
        """Partition disjointness and CST/EC-TABLE agreement."""
        rows = self.table.allocated_rows()
        owned = [sid for _, entry in rows for sid in entry.sid_vec]
        if len(owned) != len(set(owned)):
            raise SimulationError("INVARIANT", "a SID appears in more than one SID-VEC")
        if sorted(owned) != self.cst.allocated():
            raise SimulationError("INVARIANT", "CST disagrees with the EC-TABLE")
        if owned and min(owned) < self.principal_sets:
            raise SimulationError("INVARIANT", "a principal-chunk set was allocated")
        for did, entry in rows:
            if entry.ch_num != 1 << entry.index_bits:
                raise SimulationError("INVARIANT", f"domain {did}: chunk size not 2**INDEX")
            foreign = self.array.dids_in(entry.sid_vec) - {did}
            if foreign:
                raise SimulationError(
                    "INVARIANT", f"domain {did}: chunk holds lines of {sorted(foreign)}"
                )

    def dump_state(self) -> str:
        """Deterministic text rendering of the CST and EC-TABLE."""
        geometry = self.config.geometry
        lines = [
            f"geometry: {geometry.num_sets} sets x {geometry.ways} ways, "
            f"{geometry.line_size_bytes} B lines",
            f"principal: {self.principal_sets} sets "
            f"({format_sid_ranges(list(range(self.principal_sets)))})",
            f"cst: {self.cst.popcount()}/{geometry.num_sets} allocated "
            f"({format_sid_ranges(self.cst.allocated())})",
        ]
        for did, entry in self.table.allocated_rows():
            lines.append(
                f"domain {did}: alloc=1 index_bits={entry.index_bits} "
                f"ch_num={entry.ch_num} sid_vec={format_sid_ranges(entry.sid_vec)}"
            )
        return "\n".join(lines) + "\n"
