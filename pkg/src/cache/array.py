"""Set-associative cache array with domain-ID and shared-bit tag extensions.

One ``CacheArray`` backs the Chunked-Cache LLC, both baseline LLCs and every
private L1/L2 level. It knows nothing about chunks or domains beyond the two
tag-extension fields: which sets a request may touch is decided by the owner
(controller or hierarchy), which passes set IDs and optional way masks in.

State lives in 2-D numpy arrays indexed ``[set_id, way]``. Data values are
not modeled; a line is identified by (tag, did, shared, dirty).

Replacement:
    LRU     repl_meta holds a global access counter; the victim is the
            least-recent slot over the candidate union, ties broken by the
            lowest (set_id, way).
    RANDOM  one numpy Generator per set, seeded from (seed, set_id) and
            re-seeded when the set is invalidated, so a set's draws depend
            only on its own history.
"""

from collections.abc import Iterable, Sequence

import numpy as np

from src.models.errors import ConfigurationError, UsageError
from src.models.parameters import CacheGeometry, ReplacementPolicy
from src.models.results import (
    CacheLine,
    EvictionInfo,
    FlushStats,
    LookupKind,
    LookupResult,
    Slot,
)

_MISS = LookupResult(LookupKind.MISS)


class CacheArray:
    """Tag store of one cache level."""

    def __init__(self, geometry: CacheGeometry, track_removals: bool = False) -> None:
        self.geometry = geometry
        self.track_removals = track_removals
        self._removed: list[tuple[int, int, bool, bool]] = []
        shape = (geometry.num_sets, geometry.ways)
        self._valid = np.zeros(shape, dtype=bool)
        self._dirty = np.zeros(shape, dtype=bool)
        self._shared = np.zeros(shape, dtype=bool)
        self._tag = np.zeros(shape, dtype=np.int64)
        self._did = np.zeros(shape, dtype=np.int32)
        self._meta = np.zeros(shape, dtype=np.int64)
        self._clock = 0
        self._streams: dict[int, np.random.Generator] = {}

    @property
    def num_sets(self) -> int:
        return self.geometry.num_sets

    @property
    def ways(self) -> int:
        return self.geometry.ways

    def _check_set(self, set_id: int) -> None:
        if not 0 <= set_id < self.geometry.num_sets:
            raise ConfigurationError(
                f"set {set_id} out of range [0, {self.geometry.num_sets})", reason="SET_RANGE"
            )

    def _check_slot(self, slot: Slot) -> None:
        self._check_set(slot[0])
        if not 0 <= slot[1] < self.geometry.ways:
            raise ConfigurationError(
                f"way {slot[1]} out of range [0, {self.geometry.ways})", reason="WAY_RANGE"
            )

    def _touch(self, set_id: int, way: int) -> None:
        self._clock += 1
        self._meta[set_id, way] = self._clock

    def _stream(self, set_id: int) -> np.random.Generator:
        stream = self._streams.get(set_id)
        if stream is None:
            stream = np.random.default_rng([self.geometry.seed, set_id])
            self._streams[set_id] = stream
        return stream

    # ------------------------------------------------------------------
    # Core operations
    # ------------------------------------------------------------------

    def lookup(
        self,
        set_id: int,
        tag: int,
        requester_did: int,
        requester_is_nid: bool,
        *,
        way_mask: Sequence[int] | None = None,
        enforce_did: bool = True,
    ) -> LookupResult:
        """Probe one set for ``tag``.

        A match is permitted when the line's did equals the requester's, or
        when the line is shared and the requester is the NI-D. A match that
        fails the check returns PERMISSION_MISS and leaves the line untouched.
        Replacement metadata changes only on HIT.
        """
        self._check_set(set_id)
        matches = np.flatnonzero(self._valid[set_id] & (self._tag[set_id] == tag))
        if way_mask is not None:
            allowed = set(way_mask)
            matches = [w for w in matches if w in allowed]
        if len(matches) == 0:
            return _MISS

        shared_way = None
        refused_way = None
        for way in (int(w) for w in matches):
            if not enforce_did or self._did[set_id, way] == requester_did:
                self._touch(set_id, way)
                return LookupResult(LookupKind.HIT, way)
            if self._shared[set_id, way] and requester_is_nid:
                if shared_way is None:
                    shared_way = way
            elif refused_way is None:
                refused_way = way
        if shared_way is not None:
            self._touch(set_id, shared_way)
            return LookupResult(LookupKind.HIT, shared_way)
        return LookupResult(LookupKind.PERMISSION_MISS, refused_way)

    def select_victim(self, candidates: Iterable[Slot]) -> Slot:
        """Pick the slot to fill from the union of candidate slots.

        Invalid slots win first (lowest (set_id, way)); otherwise the policy
        decides over the whole union.
        """
        slots = sorted(set(candidates))
        if not slots:
            raise UsageError("victim candidate list is empty", reason="EMPTY_CANDIDATES")
        for slot in slots:
            self._check_slot(slot)
        sets = np.fromiter((s for s, _ in slots), dtype=np.int64, count=len(slots))
        ways = np.fromiter((w for _, w in slots), dtype=np.int64, count=len(slots))

        invalid = np.flatnonzero(~self._valid[sets, ways])
        if invalid.size:
            return slots[int(invalid[0])]
        if self.geometry.policy is ReplacementPolicy.LRU:
            # argmin returns the first minimum, i.e. the lowest (set_id, way)
            return slots[int(np.argmin(self._meta[sets, ways]))]
        return slots[int(self._stream(slots[0][0]).integers(len(slots)))]

    def fill(self, slot: Slot, tag: int, did: int, shared: bool, write: bool) -> EvictionInfo:
        """Install a line, reporting the previous valid occupant."""
        self._check_slot(slot)
        set_id, way = slot
        if self._valid[set_id, way]:
            eviction = EvictionInfo(
                evicted_tag=int(self._tag[set_id, way]),
                evicted_did=int(self._did[set_id, way]),
                was_dirty=bool(self._dirty[set_id, way]),
                evicted_shared=bool(self._shared[set_id, way]),
            )
        else:
            eviction = EvictionInfo()
        self._valid[set_id, way] = True
        self._dirty[set_id, way] = write
        self._tag[set_id, way] = tag
        self._did[set_id, way] = did
        self._shared[set_id, way] = shared
        self._touch(set_id, way)
        return eviction

    def _clear(self, mask: np.ndarray) -> FlushStats:
        """Invalidate the valid lines selected by a full-shape boolean mask."""
        mask = mask & self._valid
        stats = FlushStats(int(mask.sum()), int((mask & self._dirty).sum()))
        if self.track_removals and stats.lines_invalidated:
            self._removed.extend(
                zip(
                    self._tag[mask].tolist(),
                    self._did[mask].tolist(),
                    self._shared[mask].tolist(),
                    self._dirty[mask].tolist(),
                )
            )
        self._valid[mask] = False
        self._dirty[mask] = False
        self._shared[mask] = False
        self._meta[mask] = 0
        return stats

    def _set_mask(self, set_ids: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        ids = np.unique(np.fromiter(set_ids, dtype=np.int64))
        if ids.size and (ids[0] < 0 or ids[-1] >= self.geometry.num_sets):
            raise ConfigurationError("set id out of range in flush", reason="SET_RANGE")
        mask = np.zeros_like(self._valid)
        mask[ids] = True
        return ids, mask

    def invalidate_sets(self, set_ids: Iterable[int]) -> FlushStats:
        """Invalidate every way of the listed sets, counting dirty write-backs."""
        ids, mask = self._set_mask(set_ids)
        if ids.size == 0:
            return FlushStats()
        stats = self._clear(mask)
        for set_id in ids.tolist():
            self._streams.pop(set_id, None)
        return stats

    def drain_removed(self) -> list[tuple[int, int, bool, bool]]:
        """(tag, did, shared, dirty) of lines removed by bulk invalidation since the last drain."""
        removed, self._removed = self._removed, []
        return removed

    # ------------------------------------------------------------------
    # Helpers used by the controller, baselines and hierarchy
    # ------------------------------------------------------------------

    def set_slots(
        self, set_ids: Iterable[int], way_mask: Sequence[int] | None = None
    ) -> list[Slot]:
        ways = range(self.geometry.ways) if way_mask is None else way_mask
        return [(s, w) for s in set_ids for w in ways]

    def set_dirty(self, slot: Slot) -> None:
        self._check_slot(slot)
        self._dirty[slot] = True

    def find(
        self,
        set_ids: Iterable[int],
        tag: int,
        did: int | None = None,
        *,
        shared_ok: bool = False,
        way_mask: Sequence[int] | None = None,
    ) -> Slot | None:
        """First valid slot holding ``tag``; no side effects.

        With ``did`` given, the line must carry that did, or be shared when
        ``shared_ok`` is set.
        """
        for set_id in set_ids:
            self._check_set(set_id)
            match = self._valid[set_id] & (self._tag[set_id] == tag)
            if did is not None:
                owned = self._did[set_id] == did
                match &= (owned | self._shared[set_id]) if shared_ok else owned
            if way_mask is not None:
                allowed = np.zeros(self.geometry.ways, dtype=bool)
                allowed[list(way_mask)] = True
                match &= allowed
            ways = np.flatnonzero(match)
            if ways.size:
                return (set_id, int(ways[0]))
        return None

    def invalidate_tag(self, set_id: int, tag: int) -> FlushStats:
        """Remove every copy of ``tag`` from one set (inclusion back-invalidation)."""
        self._check_set(set_id)
        mask = np.zeros_like(self._valid)
        mask[set_id] = self._tag[set_id] == tag
        return self._clear(mask)

    def invalidate_owned(self, did: int, set_ids: Iterable[int]) -> FlushStats:
        """Invalidate lines tagged with ``did`` in the listed sets."""
        _, mask = self._set_mask(set_ids)
        return self._clear(mask & (self._did == did))

    def invalidate_ways(self, ways: Sequence[int]) -> FlushStats:
        """Invalidate whole ways across every set (way-partition reassignment)."""
        mask = np.zeros_like(self._valid)
        mask[:, list(ways)] = True
        return self._clear(mask)

    def invalidate_all(self) -> FlushStats:
        return self.invalidate_sets(range(self.geometry.num_sets))

    def dirty_lines(self) -> list[tuple[int, int, bool]]:
        """(tag, did, shared) of all valid dirty lines, in (set_id, way) order."""
        mask = self._valid & self._dirty
        return list(
            zip(self._tag[mask].tolist(), self._did[mask].tolist(), self._shared[mask].tolist())
        )

    def valid_tags(self) -> list[int]:
        return [int(t) for t in self._tag[self._valid]]

    def lines(self, set_id: int) -> list[CacheLine]:
        self._check_set(set_id)
        return [
            CacheLine(
                valid=bool(self._valid[set_id, w]),
                dirty=bool(self._dirty[set_id, w]),
                tag=int(self._tag[set_id, w]),
                did=int(self._did[set_id, w]),
                shared=bool(self._shared[set_id, w]),
                repl_meta=int(self._meta[set_id, w]),
            )
            for w in range(self.geometry.ways)
        ]

    def occupancy(self, set_ids: Iterable[int] | None = None) -> int:
        """Number of valid lines, optionally restricted to some sets."""
        if set_ids is None:
            return int(self._valid.sum())
        ids = np.unique(np.fromiter(set_ids, dtype=np.int64))
        return int(self._valid[ids].sum()) if ids.size else 0

    def dids_in(self, set_ids: Iterable[int]) -> set[int]:
        """Domain IDs of the valid lines in the listed sets."""
        ids = np.unique(np.fromiter(set_ids, dtype=np.int64))
        if ids.size == 0:
            return set()
        return {int(d) for d in self._did[ids][self._valid[ids]]}
