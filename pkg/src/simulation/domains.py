"""Trusted-component emulation: domain registry and request stamping.

The domain manager is the only writer of the LLC's configuration registers.
At registration a domain fixes its isolation mode and its shared regions;
EXCLUSIVE domains receive a chunk right away. Every memory request is then
stamped with (did, shared) by ``classify``.
"""

import logging

from src.cache.base import LlcModel
from src.models.errors import ConfigurationError, DomainError
from src.models.parameters import NID, DomainConfig, IsolationMode
from src.models.results import AllocReceipt, DeallocReceipt, FlushStats, RequestMeta

logger = logging.getLogger(__name__)

_NID_CONFIG = DomainConfig(did=NID, mode=IsolationMode.MAINSTREAM)


class DomainManager:
    """Registers, tears down and classifies domains for one LLC model."""

    def __init__(
        self,
        llc: LlcModel,
        max_domains: int,
        default_exclusive_sets: int,
        line_size_bytes: int,
    ) -> None:
        self.llc = llc
        self.max_domains = max_domains
        self.default_exclusive_sets = default_exclusive_sets
        self.line_size_bytes = line_size_bytes
        self._domains: dict[int, DomainConfig] = {NID: _NID_CONFIG}

    def _get(self, did: int) -> DomainConfig:
        config = self._domains.get(did)
        if config is None:
            raise DomainError("UNKNOWN_DID", f"domain {did} is not registered")
        return config

    def is_registered(self, did: int) -> bool:
        return did in self._domains

    def mode_of(self, did: int) -> IsolationMode:
        return self._get(did).mode

    def registered(self) -> list[int]:
        return sorted(self._domains)

    def register_domain(self, cfg: DomainConfig) -> tuple[int, AllocReceipt | None]:
        """Record a domain; EXCLUSIVE domains get their chunk immediately."""
        if not 0 < cfg.did < self.max_domains:
            raise DomainError(
                "DID_RANGE", f"domain {cfg.did} outside 1..{self.max_domains - 1}"
            )
        if cfg.did in self._domains:
            raise DomainError("DID_IN_USE", f"domain {cfg.did} is already registered")
        if cfg.mode is IsolationMode.MAINSTREAM and cfg.requested_sets is not None:
            raise DomainError(
                "MODE_CONFLICT", f"MAINSTREAM domain {cfg.did} cannot hold a chunk"
            )
        for region in cfg.shared_regions:
            if region.start % self.line_size_bytes or region.end % self.line_size_bytes:
                raise ConfigurationError(
                    f"shared region [{region.start:#x}, {region.end:#x}) is not line-aligned",
                    reason="REGION_ALIGNMENT",
                )

        receipt = None
        if cfg.mode is IsolationMode.EXCLUSIVE:
            sets = cfg.requested_sets or self.default_exclusive_sets
            receipt = self.llc.allocate_chunk(cfg.did, sets)
        self._domains[cfg.did] = cfg
        self.llc.enable_domain(cfg.did)
        logger.info(
            "registered domain %d (%s, %d shared regions)",
            cfg.did, cfg.mode.value, len(cfg.shared_regions),
        )
        return cfg.did, receipt

    def teardown_domain(self, did: int) -> DeallocReceipt:
        """Release the chunk (if any), purge mainstream lines and free the did."""
        if did == NID:
            raise DomainError("DID_RANGE", "the NI-D cannot be torn down")
        self._get(did)
        if self.llc.has_chunk(did):
            released = self.llc.deallocate_chunk(did)
        else:
            released = None
        purged = self.llc.purge_domain(did)
        self.llc.disable_domain(did)
        del self._domains[did]
        receipt = DeallocReceipt(
            did=did,
            ch_num=released.ch_num if released else 0,
            cycles=released.cycles if released else 0,
            flush=(released.flush if released else FlushStats()) + purged,
        )
        logger.info(
            "tore down domain %d: %d lines invalidated", did, receipt.flush.lines_invalidated
        )
        return receipt

    def classify(self, did: int, address: int) -> RequestMeta:
        """Stamp (did, shared) onto a request; region ends are exclusive."""
        config = self._get(did)
        if did == NID:
            return RequestMeta(did=NID, shared=False)
        shared = any(r.contains(address) for r in config.shared_regions)
        return RequestMeta(did=did, shared=shared)

    # Chunk directives from the scenario go through the manager so the mode
    # rule holds: only EXCLUSIVE domains own chunks.

    def _require_exclusive(self, did: int) -> None:
        if self.mode_of(did) is not IsolationMode.EXCLUSIVE:
            raise DomainError("MODE_CONFLICT", f"domain {did} is not EXCLUSIVE")

    def allocate(self, did: int, ch_num: int) -> AllocReceipt | None:
        self._require_exclusive(did)
        return self.llc.allocate_chunk(did, ch_num)

    def deallocate(self, did: int) -> DeallocReceipt | None:
        self._require_exclusive(did)
        return self.llc.deallocate_chunk(did)

    def resize(self, did: int, ch_num: int) -> AllocReceipt | None:
        self._require_exclusive(did)
        return self.llc.resize_chunk(did, ch_num)
