"""Tests for the inclusive L1/L2/LLC hierarchy.

Runs on a 1 MB / 16-way LLC (1,024 sets, principal chunk of 512) behind the
default private levels: 64 KB L1I, 32 KB L1D, 512 KB L2.

Covers:
- Per-level latency accounting and the serving level
- Split L1 by operation
- Context switches: write-back and flush
- LLC victims back-invalidated from private levels
- AMAT aggregation
"""

from dataclasses import replace
from fractions import Fraction

import pytest

from src.cache.base import build_llc
from src.models.errors import AnalysisError, ConfigurationError, DomainError, SchedulingError
from src.models.parameters import NID, AccessOp, DomainConfig, IsolationMode
from src.models.results import AccessRequest, DomainStats, RunStats
from src.simulation.domains import DomainManager
from src.simulation.hierarchy import CacheHierarchy, amat


@pytest.fixture
def config(small_config):
    return small_config(
        num_sets=1024, ways=16, principal=512, max_sets=512, default_sets=64,
        private_caches=True,
    )


def _stack(config, model="chunked"):
    llc = build_llc(model, config.controller)
    domains = DomainManager(
        llc, config.controller.max_domains, config.default_exclusive_sets, 64
    )
    return CacheHierarchy(config.hierarchy, domains)


@pytest.fixture
def hierarchy(config):
    return _stack(config)


def _req(did, line, op=AccessOp.READ, core=0):
    return AccessRequest(core=core, did=did, op=op, address=line * 64)


# ---------------------------------------------------------------------------
# Latency accounting
# ---------------------------------------------------------------------------


class TestLatency:
    """Every probed level adds its hit latency; an LLC miss adds memory."""

    def test_cold_miss(self, hierarchy):
        outcome = hierarchy.memory_access(0, _req(NID, 5))
        assert outcome.cycles == 4 + 14 + 82 + 200
        assert outcome.level == "MEM"
        assert [p.level for p in outcome.probes] == ["L1D", "L2", "L3"]
        assert not outcome.hit

    def test_l1_hit(self, hierarchy):
        hierarchy.memory_access(0, _req(NID, 5))
        outcome = hierarchy.memory_access(0, _req(NID, 5))
        assert (outcome.cycles, outcome.level, outcome.sid) == (4, "L1", None)
        assert outcome.hit

    def test_split_l1(self, hierarchy):
        hierarchy.memory_access(0, _req(NID, 5, AccessOp.IFETCH))
        outcome = hierarchy.memory_access(0, _req(NID, 5))
        assert (outcome.cycles, outcome.level) == (4 + 14, "L2")

    def test_exclusive_domain_latency(self, hierarchy):
        hierarchy.domains.register_domain(DomainConfig(1, IsolationMode.EXCLUSIVE))
        hierarchy.context_switch(0, 1)
        outcome = hierarchy.memory_access(0, _req(1, 5))
        assert outcome.cycles == 4 + 14 + 81 + 200

    def test_llc_only_mode(self, config):
        hierarchy = CacheHierarchy(
            replace(config.hierarchy, private_caches=False), _stack(config).domains
        )
        miss = hierarchy.memory_access(0, _req(NID, 5))
        hit = hierarchy.memory_access(0, _req(NID, 5))
        assert (miss.cycles, miss.level) == (282, "MEM")
        assert (hit.cycles, hit.level) == (82, "L3")
        assert [p.level for p in hit.probes] == ["L3"]


# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------


class TestContextSwitch:
    """Switches write dirty lines back and empty the private levels."""

    def test_flush_forces_llc_hit(self, hierarchy):
        hierarchy.domains.register_domain(DomainConfig(1, IsolationMode.MAINSTREAM))
        hierarchy.memory_access(0, _req(NID, 5))
        flush = hierarchy.context_switch(0, 1)
        assert flush.lines_invalidated == 2
        hierarchy.context_switch(0, NID)
        outcome = hierarchy.memory_access(0, _req(NID, 5))
        assert (outcome.cycles, outcome.level) == (4 + 14 + 82, "L3")

    def test_dirty_line_written_back(self, hierarchy):
        hierarchy.domains.register_domain(DomainConfig(1, IsolationMode.MAINSTREAM))
        hierarchy.memory_access(0, _req(NID, 5, AccessOp.WRITE))
        assert not hierarchy.llc.array.lines(5)[0].dirty
        hierarchy.context_switch(0, 1)
        assert hierarchy.llc.array.lines(5)[0].dirty

    def test_wrong_domain_on_core(self, hierarchy):
        hierarchy.domains.register_domain(DomainConfig(1, IsolationMode.MAINSTREAM))
        with pytest.raises(SchedulingError) as exc:
            hierarchy.memory_access(0, _req(1, 5))
        assert exc.value.reason == "CORE_DID_MISMATCH"

    def test_switch_to_unregistered(self, hierarchy):
        with pytest.raises(DomainError):
            hierarchy.context_switch(0, 7)

    def test_core_out_of_range(self, hierarchy):
        with pytest.raises(ConfigurationError) as exc:
            hierarchy.core(99)
        assert exc.value.reason == "CORE_RANGE"

    def test_switch_updates_core_state(self, hierarchy):
        hierarchy.domains.register_domain(DomainConfig(2, IsolationMode.MAINSTREAM))
        hierarchy.context_switch(1, 2)
        assert hierarchy.core(1).current_did == 2
        assert hierarchy.core(0).current_did == NID


# ---------------------------------------------------------------------------
# Inclusion
# ---------------------------------------------------------------------------


class TestInclusion:
    """An LLC victim leaves the private levels too."""

    def test_back_invalidation(self, hierarchy):
        hierarchy.domains.register_domain(
            DomainConfig(1, IsolationMode.EXCLUSIVE, requested_sets=1)
        )
        hierarchy.context_switch(0, 1)
        for line in range(16):
            hierarchy.memory_access(0, _req(1, line))
        evicting = hierarchy.memory_access(0, _req(1, 16))
        assert evicting.eviction.evicted_tag == 0
        assert evicting.back_invalidations == 2
        hierarchy.check_inclusion()
        again = hierarchy.memory_access(0, _req(1, 0))
        assert again.level == "MEM"

    def test_other_cores_keep_unrelated_lines(self, hierarchy):
        hierarchy.domains.register_domain(DomainConfig(2, IsolationMode.MAINSTREAM))
        hierarchy.context_switch(1, 2)
        hierarchy.memory_access(1, _req(2, 100, core=1))
        hierarchy.memory_access(0, _req(NID, 3))
        assert hierarchy.memory_access(1, _req(2, 100, core=1)).level == "L1"


# ---------------------------------------------------------------------------
# AMAT
# ---------------------------------------------------------------------------


class TestAmat:
    def test_exact_rationals(self):
        stats = RunStats(
            domains=(
                DomainStats(did=0, accesses=3, cycles=100, cells=()),
                DomainStats(did=1, accesses=1, cycles=4, cells=()),
            )
        )
        summary = amat(stats)
        assert dict(summary.per_domain) == {0: Fraction(100, 3), 1: Fraction(4)}
        assert summary.overall == Fraction(104, 4)

    def test_empty_raises(self):
        with pytest.raises(AnalysisError):
            amat(RunStats())
