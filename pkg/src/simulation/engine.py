"""Scenario replay engine.

Drives one LLC model, its domain manager and the private cache hierarchy
through an ordered event sequence and returns a frozen ``RunResult`` with
the per-access outcome log, the statistics snapshot and every chunk receipt.

Replay loop:
    For each event in file order:
        ACCESS    stamp (did, shared) via the domain manager, serve it through
                  the hierarchy, log the outcome and update statistics
        REGISTER / TEARDOWN / ALLOC / DEALLOC / RESIZE
                  reconfigure through the domain manager, then back-invalidate
                  private copies of every line the LLC dropped
        SWITCH    write back and flush the core's private caches
        BARRIER   close the running statistics phase under its label

Accesses after the last BARRIER form a trailing phase labelled ``tail``.

A ``Simulation`` owns mutable model state and is not thread-safe; give every
worker its own instance.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, replace

from src.analysis.stats import StatsCollector
from src.cache.base import LlcModel, build_llc
from src.models.parameters import AccessOp, DomainConfig, LlcModelKind, SimulatorConfig
from src.models.results import AccessOutcome, AccessRequest, AllocReceipt, DeallocReceipt, RunStats
from src.simulation.domains import DomainManager
from src.simulation.hierarchy import CacheHierarchy
from src.workloads.scenario import (
    Access,
    Alloc,
    Barrier,
    Dealloc,
    Register,
    Resize,
    ScenarioEvent,
    Switch,
    Teardown,
)

logger = logging.getLogger(__name__)

TAIL_PHASE = "tail"

Receipt = AllocReceipt | DeallocReceipt


@dataclass(frozen=True)
class LoggedAccess:
    """One replayed ACCESS and what the memory system answered."""

    index: int
    """Position of the event in the replayed sequence."""

    core: int
    did: int
    op: AccessOp
    address: int
    phase: int
    """Number of BARRIERs replayed before this access."""

    outcome: AccessOutcome


@dataclass(frozen=True)
class RunResult:
    """Everything one replay produced."""

    model: str
    log: tuple[LoggedAccess, ...]
    stats: RunStats
    receipts: tuple[Receipt, ...]

    def projections(self, did: int) -> list[tuple[bool, int | None, int]]:
        """The domain's observable (hit, sid, cycles) sequence."""
        return [entry.outcome.projection() for entry in self.log if entry.did == did]


class Simulation:
    """One LLC model plus hierarchy and domain manager, replaying events."""

    def __init__(
        self,
        config: SimulatorConfig,
        model: LlcModelKind | str | None = None,
        private_caches: bool | None = None,
        check_inclusion: bool = False,
    ) -> None:
        self.config = config
        self.kind = LlcModelKind(model) if model is not None else config.llc_model
        hierarchy_config = config.hierarchy
        if private_caches is not None:
            hierarchy_config = replace(hierarchy_config, private_caches=private_caches)
        self.llc: LlcModel = build_llc(self.kind, config.controller)
        self.domains = DomainManager(
            self.llc,
            config.controller.max_domains,
            config.default_exclusive_sets,
            config.llc.line_size_bytes,
        )
        self.hierarchy = CacheHierarchy(hierarchy_config, self.domains)
        self.check_inclusion = check_inclusion and hierarchy_config.private_caches
        self.stats = StatsCollector()
        self._log: list[LoggedAccess] = []
        self._receipts: list[Receipt] = []
        self._index = 0
        self._barriers = 0

    def _receipt(self, receipt: Receipt | None) -> None:
        if receipt is not None:
            self._receipts.append(receipt)
        for (did, level), flush in sorted(self.hierarchy.apply_llc_removals().items()):
            self.stats.record_flush(did, level, flush)

    def step(self, event: ScenarioEvent) -> AccessOutcome | None:
        """Replay one event; returns the outcome for ACCESS events."""
        index = self._index
        self._index += 1
        match event:
            case Access(core, did, op, address):
                meta = self.domains.classify(did, address)
                req = AccessRequest(core=core, did=did, op=op, address=address, shared=meta.shared)
                outcome = self.hierarchy.memory_access(core, req)
                self.stats.record_access(did, op, outcome)
                self._log.append(
                    LoggedAccess(index, core, did, op, address, self._barriers, outcome)
                )
                return outcome
            case Register(did, mode, sets, regions):
                _, receipt = self.domains.register_domain(
                    DomainConfig(did=did, mode=mode, requested_sets=sets, shared_regions=regions)
                )
                self._receipt(receipt)
            case Teardown(did):
                self._receipt(self.domains.teardown_domain(did))
            case Alloc(did, ch_num):
                self._receipt(self.domains.allocate(did, ch_num))
            case Dealloc(did):
                self._receipt(self.domains.deallocate(did))
            case Resize(did, ch_num):
                self._receipt(self.domains.resize(did, ch_num))
            case Switch(core, did):
                old_did = self.hierarchy.core(core).current_did
                self.stats.record_flush(old_did, "L2", self.hierarchy.context_switch(core, did))
            case Barrier(label):
                self.stats.close_phase(label)
                self._barriers += 1
                if self.check_inclusion:
                    self.hierarchy.check_inclusion()
                logger.debug("barrier %r after %d events", label, index + 1)
        return None

    def run(self, events: Iterable[ScenarioEvent]) -> RunResult:
        for event in events:
            self.step(event)
        return self.result()

    def result(self) -> RunResult:
        if self.stats.phase_open:
            self.stats.close_phase(TAIL_PHASE)
        if self.check_inclusion:
            self.hierarchy.check_inclusion()
        logger.info(
            "%s: replayed %d events, %d accesses", self.kind.value, self._index, len(self._log)
        )
        return RunResult(
            model=self.kind.value,
            log=tuple(self._log),
            stats=self.stats.snapshot(),
            receipts=tuple(self._receipts),
        )


def run_scenario(
    config: SimulatorConfig,
    events: Iterable[ScenarioEvent],
    model: LlcModelKind | str | None = None,
    private_caches: bool | None = None,
) -> RunResult:
    """Replay ``events`` on a fresh simulation."""
    return Simulation(config, model, private_caches).run(events)
