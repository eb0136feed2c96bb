"""Cache arrays and last-level cache models."""

from src.cache.array import CacheArray
from src.cache.base import LlcModel, build_llc
from src.cache.baselines import SharedCache, WayPartitionedCache
from src.cache.chunked import ChunkedController

__all__ = [
    "CacheArray",
    "ChunkedController",
    "LlcModel",
    "SharedCache",
    "WayPartitionedCache",
    "build_llc",
]
