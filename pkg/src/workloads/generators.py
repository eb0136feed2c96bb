"""Synthetic workload generators.

Every generator is a pure function of (spec, did, core): the same spec and
seed always expand to the same ACCESS sequence.

    WORKING_SET  uniform random lines over ``footprint`` lines
    SEQUENTIAL   cyclic walk over ``footprint`` lines, ``stride`` apart
    CONFLICT     ``conflict_lines`` lines sharing one index column
                 (``column + k * conflict_stride``), accessed cyclically
    MIXED        alternating working-set hits on the first ``footprint``
                 lines and a sequential stream over the next ``footprint``

All lines are offset by ``base_line``. For CONFLICT, ``base_line`` must be a
multiple of the index width in use or it shifts the column.
"""

import numpy as np

from src.models.parameters import AccessOp, WorkloadKind, WorkloadSpec
from src.workloads.scenario import Access


def _lines(spec: WorkloadSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.length
    i = np.arange(n, dtype=np.int64)
    match spec.kind:
        case WorkloadKind.WORKING_SET:
            offsets = rng.integers(spec.footprint, size=n, dtype=np.int64)
        case WorkloadKind.SEQUENTIAL:
            offsets = (i % spec.footprint) * spec.stride
        case WorkloadKind.CONFLICT:
            offsets = spec.column + (i % spec.conflict_lines) * spec.conflict_stride
        case WorkloadKind.MIXED:
            hot = rng.integers(spec.footprint, size=n, dtype=np.int64)
            stream = spec.footprint + (i // 2) % spec.footprint
            offsets = np.where(i % 2 == 0, hot, stream)
    return spec.base_line + offsets


def _ops(spec: WorkloadSpec, rng: np.random.Generator) -> list[AccessOp]:
    if spec.write_fraction == 0.0 and spec.ifetch_fraction == 0.0:
        return [AccessOp.READ] * spec.length
    draws = rng.random(spec.length)
    return [
        AccessOp.IFETCH
        if r < spec.ifetch_fraction
        else AccessOp.WRITE
        if r < spec.ifetch_fraction + spec.write_fraction
        else AccessOp.READ
        for r in draws
    ]


def gen(spec: WorkloadSpec, did: int, core: int, line_size: int = 64) -> list[Access]:
    """Expand a workload spec into ACCESS events for one domain on one core."""
    rng = np.random.default_rng(spec.seed)
    lines = _lines(spec, rng)
    ops = _ops(spec, rng)
    return [
        Access(core=core, did=did, op=op, address=int(line) * line_size)
        for line, op in zip(lines, ops)
    ]
