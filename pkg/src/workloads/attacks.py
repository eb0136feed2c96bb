"""Attack and experiment scenario builders.

The builders are white-box: they compute congruent lines from the index
function of the model under attack, as an adversary with the design at hand
would. Lines ``index + k * num_sets`` share the conventional set index and,
because chunk sizes and the principal chunk are powers of two no larger than
``num_sets``, also share the chunk-local index and the mainstream column.

Every builder returns a plain event list. Phases are closed by BARRIER
markers so the statistics of each step can be read back per phase.
"""

from src.models.parameters import NID, AccessOp, IsolationMode, WorkloadKind, WorkloadSpec
from src.workloads.generators import gen
from src.workloads.scenario import (
    Access,
    Barrier,
    Register,
    Resize,
    ScenarioEvent,
    Switch,
)


def _register(did: int, sets: int | None) -> list[ScenarioEvent]:
    if did == NID:
        return []
    return [Register(did=did, mode=IsolationMode.EXCLUSIVE, sets=sets)]


def congruent_lines(index: int, count: int, num_sets: int, first: int = 0) -> list[int]:
    """``count`` line addresses sharing set index ``index``."""
    return [index + (first + k) * num_sets for k in range(count)]


def build_prime_probe(
    attacker_did: int,
    victim_did: int,
    target_index: int,
    *,
    num_sets: int,
    ways: int,
    line_size: int = 64,
    prime_lines: int | None = None,
    attacker_sets: int | None = None,
    victim_sets: int | None = None,
    core: int = 0,
) -> list[ScenarioEvent]:
    """Prime one column, let the victim touch its target, probe the column.

    The attacker's probe-phase hit/miss vector is the observation. Both
    domains run on ``core``, so every hand-over is a context switch.
    """
    count = prime_lines if prime_lines is not None else ways
    prime = congruent_lines(target_index, count, num_sets)
    victim_line = target_index + (count + 1) * num_sets

    events: list[ScenarioEvent] = []
    events += _register(attacker_did, attacker_sets)
    events += _register(victim_did, victim_sets)
    events.append(Switch(core, attacker_did))
    events += [Access(core, attacker_did, AccessOp.READ, line * line_size) for line in prime]
    events.append(Barrier("prime"))
    events.append(Switch(core, victim_did))
    events.append(Access(core, victim_did, AccessOp.READ, victim_line * line_size))
    events.append(Barrier("victim"))
    events.append(Switch(core, attacker_did))
    events += [Access(core, attacker_did, AccessOp.READ, line * line_size) for line in prime]
    events.append(Barrier("probe"))
    return events


def build_occupancy_probe(
    attacker_did: int,
    victim_spec: WorkloadSpec,
    *,
    victim_did: int,
    num_sets: int,
    ways: int,
    line_size: int = 64,
    probe_sets: int | None = None,
    attacker_sets: int | None = None,
    victim_sets: int | None = None,
    core: int = 0,
) -> list[ScenarioEvent]:
    """Fill ``probe_sets`` sets completely, run the victim, re-walk and count misses.

    The attacker's probe-phase misses measure how many of its own lines the
    victim displaced. A victim footprint of zero (``length == 0``) leaves
    only the prime and probe walks.
    """
    sets = probe_sets if probe_sets is not None else min(num_sets, 64)
    footprint = [s + k * num_sets for s in range(sets) for k in range(ways)]
    walk = [Access(core, attacker_did, AccessOp.READ, line * line_size) for line in footprint]

    events: list[ScenarioEvent] = []
    events += _register(attacker_did, attacker_sets if attacker_sets is not None else sets)
    events += _register(victim_did, victim_sets)
    events.append(Switch(core, attacker_did))
    events += walk
    events.append(Barrier("prime"))
    events.append(Switch(core, victim_did))
    events += gen(victim_spec, victim_did, core, line_size)
    events.append(Barrier("victim"))
    events.append(Switch(core, attacker_did))
    events += walk
    events.append(Barrier("probe"))
    return events


def occupancy_victim(footprint: int, num_sets: int, seed: int = 0) -> WorkloadSpec:
    """One sequential pass over ``footprint`` lines from a set-aligned base."""
    return WorkloadSpec(
        kind=WorkloadKind.SEQUENTIAL,
        length=footprint,
        seed=seed,
        footprint=max(footprint, 1),
        base_line=num_sets * 4096,
    )


def build_dynamic_allocation(
    *,
    resized_did: int = 4,
    sizes: tuple[int, ...] = (1, 512, 2048, 1),
    background: tuple[int, ...] = (1, 2, 3),
    background_sets: int = 512,
    footprint: int = 2048,
    phase_length: int = 2000,
    line_size: int = 64,
    seed: int = 0,
) -> list[ScenarioEvent]:
    """Working-set domains where one domain's chunk changes size between phases.

    Each domain runs on its own core and owns a disjoint address region.
    Every phase starts with a sequential warm-up pass over each footprint
    (closed by ``phase-<k>-warmup``) followed by ``phase_length`` uniform
    working-set accesses per domain (closed by ``phase-<k>``). Accesses of
    the domains are interleaved round-robin. Between phases the resized
    domain issues a RESIZE to the next size.
    """
    dids = list(background) + [resized_did]
    events: list[ScenarioEvent] = []
    for did in background:
        events.append(Register(did=did, mode=IsolationMode.EXCLUSIVE, sets=background_sets))
    events.append(Register(did=resized_did, mode=IsolationMode.EXCLUSIVE, sets=sizes[0]))
    for core, did in enumerate(dids):
        events.append(Switch(core, did))

    def interleave(streams: list[list[Access]]) -> list[Access]:
        merged: list[Access] = []
        for step in zip(*streams, strict=True):
            merged.extend(step)
        return merged

    for phase, size in enumerate(sizes, start=1):
        if phase > 1:
            events.append(Resize(did=resized_did, ch_num=size))
        warmup = []
        steady = []
        for core, did in enumerate(dids):
            base = (did << 24)
            warmup.append(gen(
                WorkloadSpec(
                    kind=WorkloadKind.SEQUENTIAL, length=footprint,
                    footprint=footprint, base_line=base,
                ),
                did, core, line_size,
            ))
            steady.append(gen(
                WorkloadSpec(
                    kind=WorkloadKind.WORKING_SET, length=phase_length,
                    seed=seed + 1000 * phase + did, footprint=footprint, base_line=base,
                ),
                did, core, line_size,
            ))
        events += interleave(warmup)
        events.append(Barrier(f"phase-{phase}-warmup"))
        events += interleave(steady)
        events.append(Barrier(f"phase-{phase}"))
    return events
