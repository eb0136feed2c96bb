"""Frozen dataclasses for cache simulator configuration.

All configuration containers are frozen (immutable) and hashable, so one
geometry or controller configuration can be shared read-only between
independent simulation instances (e.g. the worker threads of ``compare``)
without risk of accidental mutation during a run.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from src.models.errors import ConfigurationError

NID = 0
"""Domain ID of the non-isolated domain (OS and all unprotected code)."""


def is_power_of_two(n: int) -> bool:
    """Return True for 1, 2, 4, 8, ..."""
    return n > 0 and (n & (n - 1)) == 0


def log2_exact(n: int) -> int:
    """Return log2(n) for a power of two."""
    if not is_power_of_two(n):
        raise ConfigurationError(f"{n} is not a power of two", reason="NOT_POWER_OF_TWO")
    return n.bit_length() - 1


class ReplacementPolicy(str, Enum):
    """Replacement policy selector for a cache array."""

    LRU = "LRU"
    RANDOM = "RANDOM"


class IsolationMode(str, Enum):
    """Per-domain cache isolation setting."""

    EXCLUSIVE = "EXCLUSIVE"
    MAINSTREAM = "MAINSTREAM"


class AccessOp(str, Enum):
    """Memory operation carried by an access request."""

    READ = "R"
    WRITE = "W"
    IFETCH = "IF"

    @property
    def is_write(self) -> bool:
        return self is AccessOp.WRITE

    @property
    def category(self) -> str:
        """Statistics category: 'inst' for instruction fetches, else 'data'."""
        return "inst" if self is AccessOp.IFETCH else "data"


class LlcModelKind(str, Enum):
    """Last-level cache model selector (``--llc``)."""

    CHUNKED = "chunked"
    SHARED = "shared"
    WAY = "way"


class WorkloadKind(str, Enum):
    """Synthetic workload generator kinds."""

    WORKING_SET = "working_set"
    SEQUENTIAL = "sequential"
    CONFLICT = "conflict"
    MIXED = "mixed"


@dataclass(frozen=True)
class CacheGeometry:
    """Shape of one set-associative cache array."""

    line_size_bytes: int
    """Bytes per cache line. Power of two."""

    num_sets: int
    """Number of sets. Power of two."""

    ways: int
    """Associativity (ways per set)."""

    did_bits: int = 4
    """Width of the domain-ID tag extension [bits]."""

    policy: ReplacementPolicy = ReplacementPolicy.LRU
    """Replacement policy."""

    seed: int = 0
    """Seed for the RANDOM policy streams. Ignored under LRU."""

    def __post_init__(self) -> None:
        if not is_power_of_two(self.line_size_bytes):
            raise ConfigurationError(f"line size {self.line_size_bytes} is not a power of two")
        if not is_power_of_two(self.num_sets):
            raise ConfigurationError(f"set count {self.num_sets} is not a power of two")
        if self.ways < 1:
            raise ConfigurationError(f"associativity must be >= 1, got {self.ways}")
        if self.did_bits < 1:
            raise ConfigurationError(f"did_bits must be >= 1, got {self.did_bits}")

    @property
    def capacity_bytes(self) -> int:
        return self.line_size_bytes * self.num_sets * self.ways

    @property
    def offset_bits(self) -> int:
        return self.line_size_bytes.bit_length() - 1

    @property
    def index_bits(self) -> int:
        return self.num_sets.bit_length() - 1

    @property
    def max_did(self) -> int:
        """Largest domain ID that fits in the tag extension."""
        return (1 << self.did_bits) - 1


@dataclass(frozen=True)
class ControllerConfig:
    """Chunked-Cache controller configuration.

    ``os_principal_sets`` is the hardwired principal chunk of the NI-D
    (SIDs 0..P-1). Leaving it as None selects num_sets / 2, mirroring the
    8,192-of-16,384 evaluation setup.
    """

    geometry: CacheGeometry
    max_domains: int = 16
    max_sets_per_domain: int = 8192
    os_principal_sets: int | None = None
    base_hit_cycles: int = 80
    excl_extra_cycles: int = 1
    mainstream_extra_cycles: int = 2

    def __post_init__(self) -> None:
        if self.os_principal_sets is None:
            object.__setattr__(
                self, "os_principal_sets", max(1, self.geometry.num_sets // 2)
            )
        principal = self.principal_sets
        if not is_power_of_two(principal):
            raise ConfigurationError(f"principal chunk {principal} is not a power of two")
        if principal > self.geometry.num_sets:
            raise ConfigurationError(
                f"principal chunk {principal} exceeds {self.geometry.num_sets} sets"
            )
        if self.max_domains < 1:
            raise ConfigurationError("max_domains must be >= 1")
        if self.max_domains - 1 > self.geometry.max_did:
            raise ConfigurationError(
                f"{self.max_domains} domains do not fit in {self.geometry.did_bits} DID bits"
            )
        if self.max_sets_per_domain < 1:
            raise ConfigurationError("max_sets_per_domain must be >= 1")
        if min(self.base_hit_cycles, self.excl_extra_cycles, self.mainstream_extra_cycles) < 0:
            raise ConfigurationError("latencies must be non-negative")

    @property
    def principal_sets(self) -> int:
        """Size P of the NI-D principal chunk."""
        assert self.os_principal_sets is not None
        return self.os_principal_sets

    @property
    def sid_bits(self) -> int:
        """Bits needed to store one global set ID: ceil(log2(num_sets))."""
        return (self.geometry.num_sets - 1).bit_length()

    @property
    def index_field_bits(self) -> int:
        """Width of the EC-TABLE INDEX field (holds 0..log2(max sets))."""
        return (self.max_sets_per_domain.bit_length() - 1).bit_length()


@dataclass(frozen=True)
class LevelConfig:
    """One private cache level: geometry plus hit latency [cycles]."""

    geometry: CacheGeometry
    hit_cycles: int

    def __post_init__(self) -> None:
        if self.hit_cycles <= 0:
            raise ConfigurationError(f"hit latency must be positive, got {self.hit_cycles}")


@dataclass(frozen=True)
class HierarchyConfig:
    """Private levels of the 3-level inclusive hierarchy plus memory."""

    l1i: LevelConfig
    l1d: LevelConfig
    l2: LevelConfig
    memory_latency_cycles: int = 200
    """DRAM latency [cycles]. ASSUMED value; not part of the published setup."""

    num_cores: int = 8
    private_caches: bool = True
    """False routes every access straight to the LLC (LLC-only replays)."""

    def __post_init__(self) -> None:
        if self.memory_latency_cycles <= 0:
            raise ConfigurationError("memory latency must be positive")
        if self.num_cores < 1:
            raise ConfigurationError("num_cores must be >= 1")
        l2_capacity = self.l2.geometry.capacity_bytes
        if self.private_caches and (
            l2_capacity < self.l1i.geometry.capacity_bytes
            or l2_capacity < self.l1d.geometry.capacity_bytes
        ):
            raise ConfigurationError("inclusive hierarchy requires L2 >= L1 capacity")


@dataclass(frozen=True)
class AddressRange:
    """Half-open byte address range [start, end)."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ConfigurationError(f"empty or negative range [{self.start:#x}, {self.end:#x})")

    def contains(self, address: int) -> bool:
        return self.start <= address < self.end


@dataclass(frozen=True)
class DomainConfig:
    """Setup-time configuration of one domain, as the trusted component sees it."""

    did: int
    mode: IsolationMode
    requested_sets: int | None = None
    """Chunk size for EXCLUSIVE mode; None selects the configured default."""

    shared_regions: tuple[AddressRange, ...] = ()
    """Memory regions shared with the NI-D, pairwise disjoint."""

    def __post_init__(self) -> None:
        ordered = sorted(self.shared_regions, key=lambda r: r.start)
        for left, right in zip(ordered, ordered[1:]):
            if right.start < left.end:
                raise ConfigurationError(
                    f"shared regions [{left.start:#x}, {left.end:#x}) and "
                    f"[{right.start:#x}, {right.end:#x}) overlap"
                )
        object.__setattr__(self, "shared_regions", tuple(ordered))


@dataclass(frozen=True)
class WayPartitionMap:
    """Per-domain way masks of a way-partitioned LLC.

    Ways not assigned to any domain are usable by the NI-D.
    """

    ways: int
    masks: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for did, mask in self.masks:
            if not mask:
                raise ConfigurationError(f"domain {did} has an empty way mask")
            for way in mask:
                if not 0 <= way < self.ways:
                    raise ConfigurationError(f"way {way} out of range for domain {did}")
                if way in seen:
                    raise ConfigurationError(f"way {way} assigned to more than one domain")
                seen.add(way)

    @classmethod
    def from_dict(cls, ways: int, masks: dict[int, tuple[int, ...]]) -> "WayPartitionMap":
        return cls(ways, tuple(sorted((did, tuple(sorted(m))) for did, m in masks.items())))

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return dict(self.masks)

    def unassigned(self) -> tuple[int, ...]:
        taken = {way for _, mask in self.masks for way in mask}
        return tuple(w for w in range(self.ways) if w not in taken)

    def ways_for(self, did: int) -> tuple[int, ...] | None:
        """Ways usable by ``did``; the NI-D falls back to unassigned ways."""
        mask = self.as_dict().get(did)
        if mask is not None:
            return mask
        if did == NID:
            free = self.unassigned()
            return free or None
        return None


@dataclass(frozen=True)
class WorkloadSpec:
    """Synthetic workload description. Expansion is a pure function of the spec."""

    kind: WorkloadKind
    length: int
    seed: int = 0
    footprint: int = 1024
    """Distinct lines touched (WORKING_SET / SEQUENTIAL / MIXED)."""

    stride: int = 1
    """Line stride for SEQUENTIAL."""

    conflict_lines: int = 16
    """Number of congruent lines for CONFLICT."""

    conflict_stride: int = 16384
    """Line distance between congruent lines; a multiple of every index width used."""

    column: int = 0
    """Index column (low line-address bits) shared by CONFLICT lines."""

    base_line: int = 0
    """First line address of the workload's region."""

    write_fraction: float = 0.0
    ifetch_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ConfigurationError("workload length must be >= 0")
        if self.footprint < 1 or self.conflict_lines < 1 or self.stride < 1:
            raise ConfigurationError("footprint, stride and conflict_lines must be >= 1")
        if not 0.0 <= self.write_fraction + self.ifetch_fraction <= 1.0:
            raise ConfigurationError("write_fraction + ifetch_fraction must be in [0, 1]")


@dataclass(frozen=True)
class SimulatorConfig:
    """Complete simulator configuration loaded from YAML plus overrides."""

    controller: ControllerConfig
    hierarchy: HierarchyConfig
    default_exclusive_sets: int = 512
    seed: int = 20240101
    llc_model: LlcModelKind = LlcModelKind.CHUNKED

    def __post_init__(self) -> None:
        llc = self.controller.geometry
        for level in (self.hierarchy.l1i, self.hierarchy.l1d, self.hierarchy.l2):
            if level.geometry.line_size_bytes != llc.line_size_bytes:
                raise ConfigurationError("all cache levels must share one line size")
        if self.hierarchy.private_caches and (
            llc.capacity_bytes < self.hierarchy.l2.geometry.capacity_bytes
        ):
            raise ConfigurationError("inclusive hierarchy requires LLC >= L2 capacity")
        if not is_power_of_two(self.default_exclusive_sets):
            raise ConfigurationError("default_exclusive_sets must be a power of two")

    @property
    def llc(self) -> CacheGeometry:
        return self.controller.geometry


@dataclass(frozen=True)
class RunConfig:
    """Resolved command-line run: what to load, which model, where to write."""

    config_path: Path | None
    scenario_path: Path | None
    workload: WorkloadSpec | None
    llc_model: LlcModelKind
    seed: int
    out_dir: Path
    workload_did: int = NID
