"""Controller bookkeeping: Cache Set Status Table and EC-TABLE.

The CST is one bit per global set ID (SID), set while the set is exclusively
allocated to an isolated domain. The EC-TABLE is indexed by domain ID and
holds the ALLOC flag, the INDEX bit count and the SID-VEC of each chunk. Row
0 belongs to the NI-D, whose indexing is hardwired, and is never stored.
"""

from dataclasses import dataclass

import numpy as np

from src.models.errors import AllocationError
from src.models.parameters import NID


class SetStatusTable:
    """One allocation bit per global set ID."""

    def __init__(self, num_sets: int) -> None:
        self._bits = np.zeros(num_sets, dtype=bool)

    def __len__(self) -> int:
        return len(self._bits)

    def is_allocated(self, sid: int) -> bool:
        return bool(self._bits[sid])

    def popcount(self) -> int:
        return int(self._bits.sum())

    def free_count(self, start: int = 0) -> int:
        return int((~self._bits[start:]).sum())

    def scan_free(self, start: int, count: int) -> tuple[list[int], int] | None:
        """Sequential scan from ``start`` for the first ``count`` free sets.

        Returns the chosen SIDs and how many SIDs were visited (the position
        of the last chosen SID relative to ``start``, plus one), or None when
        fewer than ``count`` free sets exist past ``start``.
        """
        free = np.flatnonzero(~self._bits[start:])
        if free.size < count:
            return None
        chosen = free[:count] + start
        return [int(s) for s in chosen], int(chosen[-1]) - start + 1

    def claim(self, sids: list[int]) -> None:
        self._bits[sids] = True

    def release(self, sids: list[int]) -> None:
        self._bits[sids] = False

    def allocated(self) -> list[int]:
        return [int(s) for s in np.flatnonzero(self._bits)]


@dataclass(frozen=True)
class ChunkTableEntry:
    """One EC-TABLE row."""

    alloc: bool
    index_bits: int
    sid_vec: tuple[int, ...]

    @property
    def ch_num(self) -> int:
        return len(self.sid_vec)


_EMPTY = ChunkTableEntry(alloc=False, index_bits=0, sid_vec=())


class ChunkTable:
    """EC-TABLE rows for domains 1..max_domains-1."""

    def __init__(self, max_domains: int, max_sets_per_domain: int) -> None:
        self.max_domains = max_domains
        self.max_sets_per_domain = max_sets_per_domain
        self._rows: dict[int, ChunkTableEntry] = {}

    def _check(self, did: int) -> None:
        if did == NID or not 0 < did < self.max_domains:
            raise AllocationError(
                "INVALID_DOMAIN",
                f"domain {did} has no EC-TABLE row (valid: 1..{self.max_domains - 1})",
            )

    def row(self, did: int) -> ChunkTableEntry:
        self._check(did)
        return self._rows.get(did, _EMPTY)

    def write(self, did: int, sid_vec: list[int]) -> ChunkTableEntry:
        self._check(did)
        if len(sid_vec) > self.max_sets_per_domain:
            raise AllocationError("EXCEEDS_MAX", f"{len(sid_vec)} sets exceed the per-domain cap")
        entry = ChunkTableEntry(
            alloc=True, index_bits=len(sid_vec).bit_length() - 1, sid_vec=tuple(sid_vec)
        )
        self._rows[did] = entry
        return entry

    def clear(self, did: int) -> ChunkTableEntry:
        """Reset a row and return what it held."""
        self._check(did)
        return self._rows.pop(did, _EMPTY)

    def allocated_rows(self) -> list[tuple[int, ChunkTableEntry]]:
        return sorted(self._rows.items())
