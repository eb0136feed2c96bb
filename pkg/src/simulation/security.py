"""Differential-replay security harness.

Non-interference is checked by replaying a scenario twice: once as written
and once with every ACCESS of the other domain removed. All structural
events (REGISTER, RESIZE, SWITCH, BARRIER, ...) stay in both replays, so the
subject sees the same configuration history. The subject passes when its
projected (hit, sid, cycles) sequences are identical.

The fuzzed suite draws seeded random scenarios on a small LLC (64 sets x
4 ways, principal chunk of 32 sets, no private caches) covering three
channels:

    prime-probe   attacker primes one column, victim touches it, attacker probes
    occupancy     attacker fills whole sets, victim streams, attacker re-walks
    fuzz          random interleaving of both domains on two cores, with an
                  optional victim RESIZE mid-run

Attacker footprints never exceed the associativity of a conventional set,
so on the shared baseline any attacker line evicted by the victim and then
re-referenced is a hit in the attacker-only replay. Such scenarios are
counted as contended.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.analysis.stats import phase_misses
from src.analysis.verdict import noninterference_verdict
from src.config import load_simulator_config
from src.models.parameters import AccessOp, IsolationMode, LlcModelKind, SimulatorConfig
from src.models.results import Verdict
from src.simulation.engine import RunResult, run_scenario
from src.workloads.attacks import build_occupancy_probe, build_prime_probe, occupancy_victim
from src.workloads.scenario import Access, Barrier, Register, Resize, ScenarioEvent, Switch

logger = logging.getLogger(__name__)

ATTACKER_DID = 1
VICTIM_DID = 2
CHANNELS = ("prime-probe", "occupancy", "fuzz")

SUITE_OVERRIDES: dict[str, Any] = {
    "llc.num_sets": 64,
    "llc.ways": 4,
    "controller.os_principal_sets": 32,
    "controller.max_sets_per_domain": 32,
    "domains.default_exclusive_sets": 8,
    "hierarchy.private_caches": False,
}

_CHUNK_SIZES = (1, 2, 4, 8, 16)


def suite_config(seed: int = 20240101) -> SimulatorConfig:
    """The small LLC the fuzzed suite runs on."""
    return load_simulator_config(overrides={**SUITE_OVERRIDES, "run.seed": seed})


def without_accesses_of(events: list[ScenarioEvent], did: int) -> list[ScenarioEvent]:
    return [e for e in events if not (isinstance(e, Access) and e.did == did)]


def differential_replay(
    config: SimulatorConfig,
    events: list[ScenarioEvent],
    subject_did: int,
    other_did: int,
    model: LlcModelKind | str | None = None,
    private_caches: bool | None = False,
) -> tuple[Verdict, RunResult, RunResult]:
    """Replay with and without the other domain's accesses and compare the subject."""
    with_other = run_scenario(config, events, model, private_caches)
    without_other = run_scenario(
        config, without_accesses_of(events, other_did), model, private_caches
    )
    verdict = noninterference_verdict(with_other.log, without_other.log, subject_did)
    return verdict, with_other, without_other


def occupancy_delta(
    config: SimulatorConfig,
    events: list[ScenarioEvent],
    attacker_did: int,
    victim_did: int,
    model: LlcModelKind | str | None = None,
    private_caches: bool | None = False,
    phase: str = "probe",
) -> int:
    """Extra attacker LLC misses in ``phase`` caused by the victim's accesses."""
    _, with_victim, without_victim = differential_replay(
        config, events, attacker_did, victim_did, model, private_caches
    )
    return phase_misses(with_victim.stats, phase, attacker_did) - phase_misses(
        without_victim.stats, phase, attacker_did
    )


def is_contended(
    result: RunResult, subject_did: int, other_did: int, offset_bits: int
) -> bool:
    """True when a subject line evicted by the other domain is re-referenced."""
    evicted_by: dict[int, int] = {}
    for entry in result.log:
        line = entry.address >> offset_bits
        if entry.did == subject_did:
            if evicted_by.pop(line, None) == other_did:
                return True
        eviction = entry.outcome.eviction
        if eviction is not None and eviction.evicted and eviction.evicted_did == subject_did:
            evicted_by[eviction.evicted_tag] = entry.did
    return False


def _fuzz(rng: np.random.Generator, num_sets: int, ways: int, line_size: int,
          attacker_sets: int, victim_sets: int) -> list[ScenarioEvent]:
    events: list[ScenarioEvent] = [
        Register(ATTACKER_DID, IsolationMode.EXCLUSIVE, attacker_sets),
        Register(VICTIM_DID, IsolationMode.EXCLUSIVE, victim_sets),
        Switch(0, ATTACKER_DID),
        Switch(1, VICTIM_DID),
    ]
    hot = 8
    count = int(rng.integers(40, 121))
    resize_at = int(rng.integers(count)) if rng.random() < 0.3 else -1
    for step in range(count):
        if step == resize_at:
            events.append(Resize(VICTIM_DID, int(rng.choice(_CHUNK_SIZES))))
        if rng.random() < 0.05:
            events.append(Barrier(f"b{step}"))
        column = int(rng.integers(hot))
        op = AccessOp.WRITE if rng.random() < 0.2 else AccessOp.READ
        if rng.random() < 0.5:
            line = column + int(rng.integers(ways)) * num_sets
            events.append(Access(0, ATTACKER_DID, op, line * line_size))
        else:
            line = column + (64 + int(rng.integers(2 * ways))) * num_sets
            events.append(Access(1, VICTIM_DID, op, line * line_size))
    return events


def random_scenario(
    rng: np.random.Generator, config: SimulatorConfig
) -> tuple[str, list[ScenarioEvent]]:
    """Draw one attacker/victim scenario; returns (channel, events)."""
    geometry = config.llc
    num_sets, ways, line_size = geometry.num_sets, geometry.ways, geometry.line_size_bytes
    attacker_sets = int(rng.choice(_CHUNK_SIZES))
    victim_sets = int(rng.choice(_CHUNK_SIZES))
    channel = CHANNELS[int(rng.integers(len(CHANNELS)))]
    if channel == "prime-probe":
        events = build_prime_probe(
            ATTACKER_DID, VICTIM_DID, int(rng.integers(num_sets)),
            num_sets=num_sets, ways=ways, line_size=line_size,
            attacker_sets=attacker_sets, victim_sets=victim_sets,
        )
    elif channel == "occupancy":
        probe_sets = int(rng.choice((4, 8, 16)))
        footprint = int(rng.integers(0, 2 * probe_sets + 1))
        events = build_occupancy_probe(
            ATTACKER_DID, occupancy_victim(footprint, num_sets),
            victim_did=VICTIM_DID, num_sets=num_sets, ways=ways, line_size=line_size,
            probe_sets=probe_sets, attacker_sets=attacker_sets, victim_sets=victim_sets,
        )
    else:
        events = _fuzz(rng, num_sets, ways, line_size, attacker_sets, victim_sets)
    return channel, events


@dataclass(frozen=True)
class SuiteReport:
    """Outcome of one fuzzed non-interference suite."""

    model: str
    scenarios: int
    passed: int
    contended: int
    """Scenarios where the victim evicted an attacker line that was re-referenced."""

    contended_failed: int
    failures: tuple[tuple[int, str, Verdict], ...] = field(default=())
    """(scenario number, channel, verdict) of the first few failures."""

    @property
    def all_passed(self) -> bool:
        return self.passed == self.scenarios

    @property
    def contended_fail_rate(self) -> float:
        return self.contended_failed / self.contended if self.contended else 0.0


def run_noninterference_suite(
    model: LlcModelKind | str = LlcModelKind.CHUNKED,
    scenarios: int = 1000,
    seed: int = 20240101,
    config: SimulatorConfig | None = None,
    keep_failures: int = 5,
) -> SuiteReport:
    """Differential-replay ``scenarios`` seeded random scenarios on one model."""
    config = config or suite_config(seed)
    kind = LlcModelKind(model)
    passed = contended = contended_failed = 0
    failures: list[tuple[int, str, Verdict]] = []
    for number in range(scenarios):
        rng = np.random.default_rng([seed, number])
        channel, events = random_scenario(rng, config)
        verdict, with_victim, _ = differential_replay(
            config, events, ATTACKER_DID, VICTIM_DID, kind
        )
        if is_contended(with_victim, ATTACKER_DID, VICTIM_DID, config.llc.offset_bits):
            contended += 1
            contended_failed += int(not verdict.passed)
        if verdict.passed:
            passed += 1
        elif len(failures) < keep_failures:
            failures.append((number, channel, verdict))
        logger.debug("scenario %d (%s): %s", number, channel, verdict.label)
    logger.info(
        "%s suite: %d/%d passed, %d contended, %d contended failed",
        kind.value, passed, scenarios, contended, contended_failed,
    )
    return SuiteReport(
        model=kind.value,
        scenarios=scenarios,
        passed=passed,
        contended=contended,
        contended_failed=contended_failed,
        failures=tuple(failures),
    )
