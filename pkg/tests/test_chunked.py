"""Tests for the Chunked-Cache LLC controller.

Uses a 16-set x 4-way LLC whose principal chunk is sets 0..7, so chunks
come from sets 8..15.

Covers:
- Allocation scan, latency and EC-TABLE contents
- Allocation / de-allocation / resize error reasons and atomicity
- Exclusive and mainstream indexing, congruent-set candidates
- Access paths, latencies, permission misses and shared regions
- Flushes on allocation and release, invariant checks
"""

import numpy as np
import pytest
from scipy.stats import chisquare

from src.cache.chunked import ChunkedController, format_sid_ranges
from src.models.errors import AllocationError, DomainError
from src.models.parameters import NID, AccessOp, IsolationMode
from src.models.results import AccessRequest

EXCL = IsolationMode.EXCLUSIVE
MAIN = IsolationMode.MAINSTREAM


@pytest.fixture
def ctrl(toy_controller_config):
    return ChunkedController(toy_controller_config)


def _req(did, line, op=AccessOp.READ, shared=False):
    return AccessRequest(core=0, did=did, op=op, address=line * 64, shared=shared)


# ---------------------------------------------------------------------------
# Allocation
# ---------------------------------------------------------------------------


class TestAllocation:
    """Chunks are claimed from the first free sets past the principal chunk."""

    def test_first_chunk(self, ctrl):
        receipt = ctrl.allocate_chunk(1, 4)
        assert receipt.sids == (8, 9, 10, 11)
        assert receipt.index_bits == 2
        assert receipt.cycles == 5
        assert ctrl.cst.allocated() == [8, 9, 10, 11]

    def test_second_chunk_pays_scan(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        receipt = ctrl.allocate_chunk(2, 2)
        assert receipt.sids == (12, 13)
        assert receipt.cycles == 7

    def test_reuses_released_sets(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        ctrl.allocate_chunk(2, 2)
        ctrl.deallocate_chunk(1)
        assert ctrl.allocate_chunk(3, 2).sids == (8, 9)

    def test_dealloc_latency(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        receipt = ctrl.deallocate_chunk(1)
        assert receipt.cycles == 6
        assert receipt.ch_num == 4
        assert ctrl.cst.popcount() == 0
        assert not ctrl.has_chunk(1)

    def test_resize_is_release_then_claim(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        receipt = ctrl.resize_chunk(1, 2)
        assert receipt.sids == (8, 9)
        assert receipt.cycles == 6 + 3
        assert ctrl.cst.allocated() == [8, 9]


class TestAllocationErrors:
    """Refusals carry a reason code and leave state untouched."""

    @pytest.mark.parametrize(
        "did,ch_num,reason",
        [
            (1, 3, "NOT_POWER_OF_TWO"),
            (1, 0, "NOT_POWER_OF_TWO"),
            (1, 16, "EXCEEDS_MAX"),
            (0, 2, "INVALID_DOMAIN"),
            (4, 2, "INVALID_DOMAIN"),
        ],
    )
    def test_bad_request(self, ctrl, did, ch_num, reason):
        with pytest.raises(AllocationError) as exc:
            ctrl.allocate_chunk(did, ch_num)
        assert exc.value.reason == reason
        assert ctrl.cst.popcount() == 0

    def test_already_allocated(self, ctrl):
        ctrl.allocate_chunk(1, 2)
        with pytest.raises(AllocationError) as exc:
            ctrl.allocate_chunk(1, 2)
        assert exc.value.reason == "ALREADY_ALLOCATED"

    def test_insufficient_sets_is_atomic(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        ctrl.allocate_chunk(2, 2)
        before = ctrl.dump_state()
        with pytest.raises(AllocationError) as exc:
            ctrl.allocate_chunk(3, 4)
        assert exc.value.reason == "INSUFFICIENT_FREE_SETS"
        assert ctrl.dump_state() == before

    def test_dealloc_without_chunk(self, ctrl):
        with pytest.raises(AllocationError) as exc:
            ctrl.deallocate_chunk(1)
        assert exc.value.reason == "NOT_ALLOCATED"

    def test_resize_checks_size_before_release(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        with pytest.raises(AllocationError):
            ctrl.resize_chunk(1, 6)
        assert ctrl.table.row(1).sid_vec == (8, 9, 10, 11)


# ---------------------------------------------------------------------------
# Indexing
# ---------------------------------------------------------------------------


class TestIndexing:
    """Chunk-local translation and congruent mainstream sets."""

    def test_map_exclusive(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        mapping = ctrl.map_exclusive(1, 6)
        assert (mapping.chunk_index, mapping.sid) == (2, 10)

    def test_candidates_skip_allocated_sets(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        assert ctrl.mainstream_candidates(4) == [4, 12]
        assert ctrl.mainstream_candidates(0) == [0]

    def test_candidates_return_after_release(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        ctrl.deallocate_chunk(1)
        assert ctrl.mainstream_candidates(0) == [0, 8]

    def test_mainstream_sets(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        assert ctrl.mainstream_sets() == [0, 1, 2, 3, 4, 5, 6, 7, 12, 13, 14, 15]

    def test_random_lines_spread_evenly(self, ctrl):
        ctrl.allocate_chunk(1, 8)
        lines = np.random.default_rng(7).integers(0, 1 << 30, size=8000)
        sids = [ctrl.map_exclusive(1, int(line)).sid for line in lines]
        counts = np.bincount(sids, minlength=16)[8:]
        assert counts.sum() == 8000
        assert chisquare(counts).pvalue > 0.001


# ---------------------------------------------------------------------------
# Access paths
# ---------------------------------------------------------------------------


class TestAccess:
    """Exclusive and mainstream lookups with their latencies."""

    def test_exclusive_miss_then_hit(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        ctrl.enable_domain(1)
        first = ctrl.access(_req(1, 6), EXCL)
        second = ctrl.access(_req(1, 6), EXCL)
        assert (first.hit, first.sid, first.cycles) == (False, 10, 81)
        assert (second.hit, second.sid, second.cycles) == (True, 10, 81)

    def test_mainstream_latency(self, ctrl):
        outcome = ctrl.access(_req(NID, 3), MAIN)
        assert (outcome.hit, outcome.sid, outcome.cycles) == (False, 3, 82)

    def test_mainstream_spills_into_congruent_set(self, ctrl):
        for k in range(5):
            ctrl.access(_req(NID, 4 + 8 * k), MAIN)
        assert ctrl.array.occupancy([4]) == 4
        assert ctrl.array.occupancy([12]) == 1
        assert ctrl.access(_req(NID, 4 + 8 * 4), MAIN).sid == 12

    def test_exclusive_victim_stays_in_chunk(self, ctrl):
        ctrl.allocate_chunk(1, 1)
        ctrl.enable_domain(1)
        for k in range(6):
            outcome = ctrl.access(_req(1, k * 16), EXCL)
            assert outcome.sid == 8
        assert ctrl.array.occupancy([8]) == 4
        assert ctrl.array.occupancy() == 4

    def test_permission_miss(self, ctrl):
        ctrl.enable_domain(3)
        ctrl.access(_req(3, 5), MAIN)
        outcome = ctrl.access(_req(NID, 5), MAIN)
        assert not outcome.hit
        assert outcome.permission_miss
        assert outcome.cycles == 82

    def test_shared_region_visible_to_nid(self, ctrl):
        ctrl.allocate_chunk(1, 2)
        ctrl.enable_domain(1)
        ctrl.access(_req(1, 5, shared=True), EXCL)
        outcome = ctrl.access(_req(NID, 5), MAIN)
        assert outcome.hit
        assert outcome.sid == 5

    def test_exclusive_lines_hidden_from_nid(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        ctrl.enable_domain(1)
        ctrl.access(_req(1, 8), EXCL)
        outcome = ctrl.access(_req(NID, 8), MAIN)
        assert not outcome.hit
        assert not outcome.permission_miss

    def test_write_sets_dirty(self, ctrl):
        ctrl.access(_req(NID, 2, AccessOp.WRITE), MAIN)
        assert ctrl.array.lines(2)[0].dirty

    def test_unregistered_domain(self, ctrl):
        with pytest.raises(DomainError) as exc:
            ctrl.access(_req(2, 0), MAIN)
        assert exc.value.reason == "UNREGISTERED_DOMAIN"

    def test_exclusive_without_chunk(self, ctrl):
        ctrl.enable_domain(2)
        with pytest.raises(DomainError) as exc:
            ctrl.access(_req(2, 0), EXCL)
        assert exc.value.reason == "EXCLUSIVE_WITHOUT_CHUNK"


# ---------------------------------------------------------------------------
# Flushes and invariants
# ---------------------------------------------------------------------------


class TestFlushes:
    """Sets are emptied whenever their owner changes."""

    def test_allocation_flushes_nid_lines(self, ctrl):
        for k in range(5):
            ctrl.access(_req(NID, 4 + 8 * k), MAIN)
        receipt = ctrl.allocate_chunk(1, 8)
        assert receipt.flush.lines_invalidated == 1
        assert ctrl.array.occupancy([12]) == 0
        assert ctrl.drain_removed() == [(4 + 8 * 4, NID, False, False)]

    def test_release_writes_back_dirty_lines(self, ctrl):
        ctrl.allocate_chunk(1, 1)
        ctrl.enable_domain(1)
        ctrl.access(_req(1, 0, AccessOp.WRITE), EXCL)
        ctrl.access(_req(1, 16), EXCL)
        receipt = ctrl.deallocate_chunk(1)
        assert receipt.flush.lines_invalidated == 2
        assert receipt.flush.dirty_writebacks == 1

    def test_purge_removes_mainstream_lines(self, ctrl):
        ctrl.enable_domain(3)
        ctrl.access(_req(3, 1), MAIN)
        ctrl.access(_req(NID, 2), MAIN)
        assert ctrl.purge_domain(3).lines_invalidated == 1
        assert ctrl.array.occupancy() == 1

    def test_invariants_hold_after_churn(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        ctrl.allocate_chunk(2, 2)
        ctrl.resize_chunk(1, 1)
        ctrl.allocate_chunk(3, 2)
        ctrl.check_invariants()
        owned = [set(ctrl.table.row(d).sid_vec) for d in (1, 2, 3)]
        assert not (owned[0] & owned[1] or owned[0] & owned[2] or owned[1] & owned[2])

    def test_dump_state(self, ctrl):
        ctrl.allocate_chunk(1, 4)
        text = ctrl.dump_state()
        assert "principal: 8 sets (0-7)" in text
        assert "domain 1: alloc=1 index_bits=2 ch_num=4 sid_vec=8-11" in text


def test_format_sid_ranges():
    assert format_sid_ranges([8, 9, 10, 11, 14]) == "8-11,14"
    assert format_sid_ranges([]) == "-"
    assert format_sid_ranges([3]) == "3"
