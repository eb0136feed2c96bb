"""Configuration and result dataclasses for the cache simulator."""

from src.models.parameters import (
    NID,
    AccessOp,
    AddressRange,
    CacheGeometry,
    ControllerConfig,
    DomainConfig,
    HierarchyConfig,
    IsolationMode,
    LevelConfig,
    LlcModelKind,
    ReplacementPolicy,
    SimulatorConfig,
    WayPartitionMap,
    WorkloadKind,
    WorkloadSpec,
)
from src.models.results import (
    AccessOutcome,
    AccessRequest,
    AllocReceipt,
    DeallocReceipt,
    EvictionInfo,
    FlushStats,
    LookupResult,
    OverheadBreakdown,
    RunStats,
    Verdict,
)

__all__ = [
    "NID",
    "AccessOp",
    "AccessOutcome",
    "AccessRequest",
    "AddressRange",
    "AllocReceipt",
    "CacheGeometry",
    "ControllerConfig",
    "DeallocReceipt",
    "DomainConfig",
    "EvictionInfo",
    "FlushStats",
    "HierarchyConfig",
    "IsolationMode",
    "LevelConfig",
    "LlcModelKind",
    "LookupResult",
    "OverheadBreakdown",
    "ReplacementPolicy",
    "RunStats",
    "SimulatorConfig",
    "Verdict",
    "WayPartitionMap",
    "WorkloadKind",
    "WorkloadSpec",
]
