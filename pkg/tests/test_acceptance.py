"""End-to-end acceptance checks.

Covers:
- Replay agrees access-by-access with an independent reference model
- Fuzzed non-interference: chunked passes everything, shared fails
  every contended scenario
- Conflict-heavy domain: chunk beats a way partition of equal capacity
- Allocated sets shrink the mainstream pool seen by the NI-D
- Dynamic resizing tracks the chunk size and leaves other domains alone
"""

import numpy as np
import pytest

from src.analysis.stats import phase_miss_rate
from src.models.parameters import (
    NID,
    AccessOp,
    AddressRange,
    IsolationMode,
    WorkloadKind,
    WorkloadSpec,
)
from src.simulation.engine import run_scenario
from src.simulation.security import run_noninterference_suite
from src.workloads.attacks import build_dynamic_allocation
from src.workloads.generators import gen
from src.workloads.scenario import Access, Barrier, Register, Resize, Switch
from tests.reference_model import ReferenceChunkedLlc

SHARED_LINES = range(192, 256)


# ---------------------------------------------------------------------------
# Reference model agreement
# ---------------------------------------------------------------------------


def _oracle_events(seed: int, steps: int) -> list:
    rng = np.random.default_rng(seed)
    region = AddressRange(SHARED_LINES.start * 64, SHARED_LINES.stop * 64)
    events: list = [
        Register(1, IsolationMode.EXCLUSIVE, 4, (region,)),
        Register(2, IsolationMode.EXCLUSIVE, 8),
        Register(3, IsolationMode.MAINSTREAM),
        Switch(1, 1),
        Switch(2, 2),
        Switch(3, 3),
    ]
    for _ in range(steps):
        if rng.random() < 0.01:
            events.append(Resize(int(rng.integers(1, 3)), int(rng.choice((1, 2, 4, 8)))))
            continue
        did = int(rng.integers(4))
        op = AccessOp.WRITE if rng.random() < 0.2 else AccessOp.READ
        events.append(Access(did, did, op, int(rng.integers(320)) * 64))
    return events


def _reference_projections(events: list) -> list[tuple[int, bool, int, int]]:
    ref = ReferenceChunkedLlc(num_sets=64, ways=4, principal=32)
    ref.allocate(1, 4)
    ref.allocate(2, 8)
    seen = []
    for event in events:
        if isinstance(event, Resize):
            ref.resize(event.did, event.ch_num)
        elif isinstance(event, Access):
            line = event.address // 64
            shared = event.did == 1 and line in SHARED_LINES
            mainstream = event.did in (NID, 3) or shared
            seen.append((event.did, *ref.access(event.did, line, mainstream, shared)))
    return seen


class TestReferenceAgreement:
    """10,000 mixed events on a 64-set x 4-way LLC with a 32-set principal chunk."""

    def test_matches_reference(self, small_config):
        events = _oracle_events(seed=2024, steps=10_000)
        result = run_scenario(small_config(), events, model="chunked")
        replayed = [(e.did, *e.outcome.projection()) for e in result.log]
        expected = _reference_projections(events)
        assert len(replayed) == len(expected)
        for position, (got, want) in enumerate(zip(replayed, expected)):
            assert got == want, f"access {position}: {got} != {want}"

    def test_exercises_every_path(self, small_config):
        result = run_scenario(small_config(), _oracle_events(seed=2024, steps=10_000))
        outcomes = [e.outcome for e in result.log]
        assert any(o.permission_miss for o in outcomes)
        assert any(o.hit and o.cycles == 82 for o in outcomes)
        assert any(o.hit and o.cycles == 81 for o in outcomes)
        assert any(o.sid is not None and o.sid >= 32 and o.cycles in (82, 282) for o in outcomes)


# ---------------------------------------------------------------------------
# Non-interference suite
# ---------------------------------------------------------------------------


class TestNonInterferenceSuite:
    """1,000 seeded scenarios per model."""

    def test_chunked_passes_all(self):
        report = run_noninterference_suite("chunked", scenarios=1000)
        assert report.all_passed, report.failures

    def test_shared_fails_contended(self):
        report = run_noninterference_suite("shared", scenarios=1000)
        assert report.contended > 0
        assert report.contended_fail_rate >= 0.99


# ---------------------------------------------------------------------------
# Conflict workload
# ---------------------------------------------------------------------------


class TestConflictWorkload:
    """16 congruent lines: one 16-way chunk set holds them, one way does not."""

    @pytest.mark.parametrize("model,expected", [("chunked", 0.0), ("way", 1.0)])
    def test_steady_state_miss_rate(self, small_config, model, expected):
        config = small_config(num_sets=256, ways=16, principal=128, max_sets=128, default_sets=16)
        spec = WorkloadSpec(WorkloadKind.CONFLICT, 16, conflict_lines=16, conflict_stride=256)
        steady = WorkloadSpec(WorkloadKind.CONFLICT, 1600, conflict_lines=16, conflict_stride=256)
        events = [
            Register(1, IsolationMode.EXCLUSIVE, 16),
            Switch(0, 1),
            *gen(spec, 1, 0),
            Barrier("warmup"),
            *gen(steady, 1, 0),
            Barrier("steady"),
        ]
        stats = run_scenario(config, events, model=model).stats
        assert phase_miss_rate(stats, "steady", 1) == expected


# ---------------------------------------------------------------------------
# Mainstream pool
# ---------------------------------------------------------------------------


class TestMainstreamPool:
    """Every allocated set is one fewer congruent set for the NI-D."""

    def _nid_miss_rate(self, small_config, chunks):
        config = small_config(num_sets=1024, ways=4, principal=512, max_sets=256)
        events = [Register(did, IsolationMode.EXCLUSIVE, 256) for did in chunks]
        events += gen(WorkloadSpec(WorkloadKind.WORKING_SET, 20_000, seed=1, footprint=2560), 0, 0)
        return run_scenario(config, events).stats.domain(NID).level("L3").miss_rate

    def test_more_chunks_more_misses(self, small_config):
        one = self._nid_miss_rate(small_config, (1,))
        two = self._nid_miss_rate(small_config, (1, 2))
        assert one < two


# ---------------------------------------------------------------------------
# Dynamic allocation
# ---------------------------------------------------------------------------


class TestDynamicAllocation:
    """D4 resized 1 -> 512 -> 2048 -> 1 sets next to three 512-set domains."""

    @pytest.fixture
    def config(self, small_config):
        return small_config(
            num_sets=8192, ways=16, principal=2048, max_sets=2048, default_sets=512
        )

    def test_miss_rate_follows_chunk_size(self, config):
        stats = run_scenario(config, build_dynamic_allocation()).stats
        rates = [phase_miss_rate(stats, f"phase-{k}", 4) for k in range(1, 5)]
        assert rates[0] >= rates[1] >= rates[2]
        assert abs(rates[3] - rates[0]) < 0.02
        assert rates[0] > 0.9

    def test_background_domains_unaffected(self, config):
        resized = run_scenario(config, build_dynamic_allocation())
        fixed = run_scenario(config, build_dynamic_allocation(sizes=(1, 1, 1, 1)))
        for did in (1, 2, 3):
            assert resized.projections(did) == fixed.projections(did)
