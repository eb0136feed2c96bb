"""Tests for the attack and experiment scenario builders."""

from src.models.parameters import IsolationMode, WorkloadKind
from src.workloads.attacks import (
    build_dynamic_allocation,
    build_occupancy_probe,
    build_prime_probe,
    congruent_lines,
    occupancy_victim,
)
from src.workloads.scenario import Access, Barrier, Register, Resize, Switch


def _labels(events):
    return [e.label for e in events if isinstance(e, Barrier)]


class TestPrimeProbe:
    """Prime one column, victim touch, probe."""

    def test_congruent_lines(self):
        assert congruent_lines(5, 3, 64) == [5, 69, 133]
        assert congruent_lines(5, 2, 64, first=2) == [133, 197]

    def test_event_layout(self):
        events = build_prime_probe(1, 2, 5, num_sets=64, ways=4)
        assert _labels(events) == ["prime", "victim", "probe"]
        assert events[:3] == [
            Register(1, IsolationMode.EXCLUSIVE),
            Register(2, IsolationMode.EXCLUSIVE),
            Switch(0, 1),
        ]
        attacker = [e.address // 64 for e in events if isinstance(e, Access) and e.did == 1]
        assert attacker == [5, 69, 133, 197] * 2
        victim = [e.address // 64 for e in events if isinstance(e, Access) and e.did == 2]
        assert victim == [5 + 5 * 64]

    def test_nid_attacker_not_registered(self):
        events = build_prime_probe(0, 2, 5, num_sets=64, ways=4, prime_lines=2)
        registers = [e for e in events if isinstance(e, Register)]
        assert [r.did for r in registers] == [2]

    def test_chunk_sizes_passed(self):
        events = build_prime_probe(
            1, 2, 0, num_sets=64, ways=4, attacker_sets=2, victim_sets=16
        )
        assert [e.sets for e in events if isinstance(e, Register)] == [2, 16]


class TestOccupancyProbe:
    """Fill whole sets, run the victim, re-walk."""

    def test_walk_covers_sets_times_ways(self):
        events = build_occupancy_probe(
            1, occupancy_victim(10, 64), victim_did=2, num_sets=64, ways=4, probe_sets=8
        )
        attacker = [e for e in events if isinstance(e, Access) and e.did == 1]
        assert len(attacker) == 2 * 8 * 4
        assert len({a.address for a in attacker}) == 32
        victim = [e for e in events if isinstance(e, Access) and e.did == 2]
        assert len(victim) == 10
        assert _labels(events) == ["prime", "victim", "probe"]

    def test_attacker_chunk_defaults_to_probe_sets(self):
        events = build_occupancy_probe(
            1, occupancy_victim(0, 64), victim_did=2, num_sets=64, ways=4, probe_sets=16
        )
        assert next(e for e in events if isinstance(e, Register)).sets == 16

    def test_empty_victim(self):
        spec = occupancy_victim(0, 64)
        assert spec.kind is WorkloadKind.SEQUENTIAL
        assert spec.length == 0
        assert spec.base_line % 64 == 0


class TestDynamicAllocation:
    """Phases with a resized domain between them."""

    def test_phase_markers_and_resizes(self):
        events = build_dynamic_allocation(footprint=16, phase_length=10)
        assert _labels(events) == [
            label
            for k in range(1, 5)
            for label in (f"phase-{k}-warmup", f"phase-{k}")
        ]
        resizes = [e for e in events if isinstance(e, Resize)]
        assert [(r.did, r.ch_num) for r in resizes] == [(4, 512), (4, 2048), (4, 1)]

    def test_domains_on_own_cores(self):
        events = build_dynamic_allocation(footprint=16, phase_length=10)
        switches = [(e.core, e.did) for e in events if isinstance(e, Switch)]
        assert switches == [(0, 1), (1, 2), (2, 3), (3, 4)]
        for e in events:
            if isinstance(e, Access):
                assert e.core == e.did - 1
                assert (e.address // 64) >> 24 == e.did

    def test_access_counts(self):
        events = build_dynamic_allocation(footprint=16, phase_length=10)
        accesses = [e for e in events if isinstance(e, Access)]
        assert len(accesses) == 4 * 4 * (16 + 10)
