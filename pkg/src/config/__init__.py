"""Configuration loading for the cache simulator."""

from src.config.loader import load_simulator_config, published_config

__all__ = [
    "load_simulator_config",
    "published_config",
]
