"""Latency formulas of the Chunked-Cache controller.

All values are exact integer cycle counts:

    allocation       = SIDs scanned + 1 (EC-TABLE update)
    de-allocation    = CH-NUM + 2 (ALLOC reset, SID-VEC read-out, CST clears)
    exclusive hit    = base + 1 (EC-TABLE lookup)
    mainstream hit   = base + 2 (CST check plus congruent-set probe)
    shared baseline  = base

The worst-case allocation scans every SID: 16,384 + 1 cycles on the 16 MB
LLC. The worst-case de-allocation releases 8,192 sets: 8,194 cycles.
"""

from src.models.parameters import ControllerConfig


def alloc_latency(ch_num: int, sids_scanned: int) -> int:
    """Allocation cycles: every visited SID costs one cycle, plus the table write."""
    if ch_num < 1 or sids_scanned < ch_num:
        raise ValueError(f"invalid allocation: ch_num={ch_num}, scanned={sids_scanned}")
    return sids_scanned + 1


def dealloc_latency(ch_num: int) -> int:
    if ch_num < 1:
        raise ValueError(f"ch_num must be positive, got {ch_num}")
    return ch_num + 2


def exclusive_latency(cfg: ControllerConfig) -> int:
    return cfg.base_hit_cycles + cfg.excl_extra_cycles


def mainstream_latency(cfg: ControllerConfig) -> int:
    return cfg.base_hit_cycles + cfg.mainstream_extra_cycles


def shared_latency(cfg: ControllerConfig) -> int:
    return cfg.base_hit_cycles
