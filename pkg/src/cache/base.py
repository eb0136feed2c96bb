"""Common interface of the three LLC models and the model factory."""

from typing import Protocol

from src.cache.array import CacheArray
from src.cache.baselines import SharedCache, WayPartitionedCache
from src.cache.chunked import ChunkedController
from src.models.parameters import ControllerConfig, IsolationMode, LlcModelKind
from src.models.results import (
    AccessOutcome,
    AccessRequest,
    AllocReceipt,
    DeallocReceipt,
    FlushStats,
)


class LlcModel(Protocol):
    """What the hierarchy and the domain manager need from an LLC."""

    name: str
    config: ControllerConfig
    array: CacheArray
    enforces_did: bool
    """Whether hits require a did match (or a shared line)."""

    def access(self, req: AccessRequest, mode: IsolationMode) -> AccessOutcome: ...

    def mark_dirty(self, req: AccessRequest, mode: IsolationMode) -> bool: ...

    def allocate_chunk(self, did: int, ch_num: int) -> AllocReceipt | None: ...

    def deallocate_chunk(self, did: int) -> DeallocReceipt | None: ...

    def resize_chunk(self, did: int, new_ch_num: int) -> AllocReceipt | None: ...

    def has_chunk(self, did: int) -> bool: ...

    def enable_domain(self, did: int) -> None: ...

    def disable_domain(self, did: int) -> None: ...

    def is_enabled(self, did: int) -> bool: ...

    def purge_domain(self, did: int) -> FlushStats: ...

    def drain_removed(self) -> list[tuple[int, int, bool, bool]]: ...


def build_llc(kind: LlcModelKind | str, config: ControllerConfig) -> LlcModel:
    """Instantiate the LLC model selected by ``--llc``."""
    kind = LlcModelKind(kind)
    if kind is LlcModelKind.CHUNKED:
        return ChunkedController(config)
    if kind is LlcModelKind.SHARED:
        return SharedCache(config)
    return WayPartitionedCache(config)
