"""Reference LLC models behind the same interface as the chunked controller.

SharedCache
    An unmodified set-associative LLC: conventional indexing over all sets,
    no domain checks, base latency. Any domain hits on any other domain's
    line.

WayPartitionedCache
    CAT/DAWG-style way partitioning. A domain's chunk request is translated
    into a capacity-equivalent number of ways,
    ``max(1, requested_sets * ways // num_sets)``, taken from the lowest free
    ways. Lookups and victim selection are confined to the domain's ways;
    the NI-D (and MAINSTREAM domains and shared-region requests) use every
    unassigned way. The ways themselves are the protection, so DID tags are
    not compared.
"""

import logging

from src.analysis.latency import shared_latency
from src.cache.array import CacheArray
from src.models.errors import AllocationError, DomainError
from src.models.parameters import (
    NID,
    ControllerConfig,
    IsolationMode,
    WayPartitionMap,
    is_power_of_two,
)
from src.models.results import (
    AccessOutcome,
    AccessRequest,
    AllocReceipt,
    DeallocReceipt,
    FlushStats,
)

logger = logging.getLogger(__name__)


class _ConventionalLlc:
    """Shared plumbing: conventional set index, domain registration, base latency."""

    name = ""
    enforces_did = False

    def __init__(self, config: ControllerConfig) -> None:
        self.config = config
        self.array = CacheArray(config.geometry, track_removals=True)
        self._enabled: set[int] = {NID}
        self._offset_bits = config.geometry.offset_bits
        self._set_mask = config.geometry.num_sets - 1

    def line_of(self, address: int) -> int:
        return address >> self._offset_bits

    def set_of(self, line_addr: int) -> int:
        return line_addr & self._set_mask

    def enable_domain(self, did: int) -> None:
        self._enabled.add(did)

    def disable_domain(self, did: int) -> None:
        if did != NID:
            self._enabled.discard(did)

    def is_enabled(self, did: int) -> bool:
        return did in self._enabled

    def _check_registered(self, did: int) -> None:
        if did not in self._enabled:
            raise DomainError("UNREGISTERED_DOMAIN", f"domain {did} is not registered")

    def _validate_request(self, did: int, ch_num: int) -> None:
        if not 0 < did < self.config.max_domains:
            raise AllocationError(
                "INVALID_DOMAIN", f"domain {did} outside 1..{self.config.max_domains - 1}"
            )
        if ch_num < 1 or not is_power_of_two(ch_num):
            raise AllocationError("NOT_POWER_OF_TWO", f"domain {did}: {ch_num} sets")
        if ch_num > self.config.max_sets_per_domain:
            raise AllocationError("EXCEEDS_MAX", f"domain {did}: {ch_num} sets")

    def _serve(
        self, req: AccessRequest, way_mask: tuple[int, ...] | None
    ) -> AccessOutcome:
        tag = self.line_of(req.address)
        set_id = self.set_of(tag)
        cycles = shared_latency(self.config)
        result = self.array.lookup(
            set_id, tag, req.did, req.did == NID, way_mask=way_mask, enforce_did=False
        )
        if result.hit:
            assert result.way is not None
            if req.op.is_write:
                self.array.set_dirty((set_id, result.way))
            return AccessOutcome(
                did=req.did, hit=True, permission_miss=False, sid=set_id, cycles=cycles
            )
        slot = self.array.select_victim(self.array.set_slots([set_id], way_mask))
        eviction = self.array.fill(slot, tag, req.did, req.shared, req.op.is_write)
        return AccessOutcome(
            did=req.did,
            hit=False,
            permission_miss=False,
            sid=set_id,
            cycles=cycles,
            eviction=eviction,
        )

    def _mark(self, req: AccessRequest, way_mask: tuple[int, ...] | None) -> bool:
        tag = self.line_of(req.address)
        slot = self.array.find([self.set_of(tag)], tag, way_mask=way_mask)
        if slot is None:
            return False
        self.array.set_dirty(slot)
        return True

    def purge_domain(self, did: int) -> FlushStats:
        return self.array.invalidate_owned(did, range(self.config.geometry.num_sets))

    def drain_removed(self) -> list[tuple[int, int, bool, bool]]:
        return self.array.drain_removed()


class SharedCache(_ConventionalLlc):
    """Insecure shared LLC; chunk requests are accepted and ignored."""

    name = "shared"

    def has_chunk(self, did: int) -> bool:
        return False

    def allocate_chunk(self, did: int, ch_num: int) -> AllocReceipt | None:
        self._validate_request(did, ch_num)
        return None

    def deallocate_chunk(self, did: int) -> DeallocReceipt | None:
        return None

    def resize_chunk(self, did: int, new_ch_num: int) -> AllocReceipt | None:
        self._validate_request(did, new_ch_num)
        return None

    def access(self, req: AccessRequest, mode: IsolationMode) -> AccessOutcome:
        self._check_registered(req.did)
        return self._serve(req, None)

    def mark_dirty(self, req: AccessRequest, mode: IsolationMode) -> bool:
        return self._mark(req, None)


class WayPartitionedCache(_ConventionalLlc):
    """Way-partitioned LLC with capacity-equivalent way masks."""

    name = "way"

    def __init__(self, config: ControllerConfig) -> None:
        super().__init__(config)
        self._masks: dict[int, tuple[int, ...]] = {}

    @property
    def partition(self) -> WayPartitionMap:
        return WayPartitionMap.from_dict(self.config.geometry.ways, self._masks)

    def ways_for_sets(self, ch_num: int) -> int:
        geometry = self.config.geometry
        return max(1, ch_num * geometry.ways // geometry.num_sets)

    def has_chunk(self, did: int) -> bool:
        return did in self._masks

    def allocate_chunk(self, did: int, ch_num: int) -> AllocReceipt:
        """Assign the lowest free ways; at least one way stays with the NI-D."""
        self._validate_request(did, ch_num)
        if did in self._masks:
            raise AllocationError("ALREADY_ALLOCATED", f"domain {did} already holds ways")
        wanted = self.ways_for_sets(ch_num)
        free = self.partition.unassigned()
        if len(free) - wanted < 1:
            raise AllocationError(
                "INSUFFICIENT_FREE_WAYS",
                f"domain {did}: {wanted} ways requested, {len(free)} free",
            )
        ways = free[:wanted]
        self._masks[did] = ways
        flush = self.array.invalidate_ways(ways)
        logger.info("assigned ways %s to domain %d", list(ways), did)
        return AllocReceipt(
            did=did,
            ch_num=ch_num,
            index_bits=ch_num.bit_length() - 1,
            sids=(),
            cycles=0,
            flush=flush,
        )

    def deallocate_chunk(self, did: int) -> DeallocReceipt:
        ways = self._masks.pop(did, None)
        if ways is None:
            raise AllocationError("NOT_ALLOCATED", f"domain {did} holds no ways")
        flush = self.array.invalidate_ways(ways)
        logger.info("released ways %s of domain %d", list(ways), did)
        ch_num = len(ways) * self.config.geometry.num_sets // self.config.geometry.ways
        return DeallocReceipt(did=did, ch_num=max(1, ch_num), cycles=0, flush=flush)

    def resize_chunk(self, did: int, new_ch_num: int) -> AllocReceipt:
        if did not in self._masks:
            raise AllocationError("NOT_ALLOCATED", f"domain {did} holds no ways")
        self._validate_request(did, new_ch_num)
        released = self.deallocate_chunk(did)
        allocated = self.allocate_chunk(did, new_ch_num)
        return AllocReceipt(
            did=did,
            ch_num=allocated.ch_num,
            index_bits=allocated.index_bits,
            sids=(),
            cycles=0,
            flush=released.flush + allocated.flush,
        )

    def _mask_for(self, req: AccessRequest, mode: IsolationMode) -> tuple[int, ...]:
        if req.did == NID or mode is IsolationMode.MAINSTREAM or req.shared:
            mask = self.partition.ways_for(NID)
        else:
            mask = self._masks.get(req.did)
        if not mask:
            raise DomainError("UNMAPPED_DOMAIN", f"domain {req.did} has no ways")
        return mask

    def access(self, req: AccessRequest, mode: IsolationMode) -> AccessOutcome:
        self._check_registered(req.did)
        return self._serve(req, self._mask_for(req, mode))

    def mark_dirty(self, req: AccessRequest, mode: IsolationMode) -> bool:
        try:
            mask = self._mask_for(req, mode)
        except DomainError:
            return False
        return self._mark(req, mask)
