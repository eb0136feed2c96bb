"""Storage overhead of the chunked controller.

    CST          one bit per LLC set
    EC-TABLE     per domain: ALLOC bit + INDEX field + SID-VEC
                 (max_sets_per_domain SIDs of ceil(log2(num_sets)) bits each)
    tag extension  per line: did_bits + 1 shared bit

Bit counts are exact integers. KB means 1,024 bytes; rounding happens only
when a value is displayed.
"""

from fractions import Fraction

from src.models.parameters import ControllerConfig
from src.models.results import OverheadBreakdown

KB = 1024


def storage_overhead(cfg: ControllerConfig) -> OverheadBreakdown:
    geometry = cfg.geometry
    row_bits = 1 + cfg.index_field_bits + cfg.max_sets_per_domain * cfg.sid_bits
    return OverheadBreakdown(
        cst_bits=geometry.num_sets,
        ectable_bits=cfg.max_domains * row_bits,
        tag_extra_bits=geometry.num_sets * geometry.ways * (geometry.did_bits + 1),
        llc_capacity_bytes=geometry.capacity_bytes,
    )


def bits_to_kb(bits: int) -> Fraction:
    return Fraction(bits, 8 * KB)
