"""Shared fixtures: small geometries that keep replays fast."""

import pytest

from src.config import load_simulator_config
from src.models.parameters import CacheGeometry, ControllerConfig


@pytest.fixture
def toy_geometry():
    """16 sets x 4 ways, 64 B lines."""
    return CacheGeometry(line_size_bytes=64, num_sets=16, ways=4)


@pytest.fixture
def toy_controller_config(toy_geometry):
    """Principal chunk of 8 sets, chunks of up to 8 sets, 4 domains."""
    return ControllerConfig(
        geometry=toy_geometry, max_domains=4, max_sets_per_domain=8, os_principal_sets=8
    )


@pytest.fixture
def small_config():
    """Factory for validated configurations on a reduced LLC (LLC-only unless asked)."""

    def make(
        num_sets=64, ways=4, principal=32, max_sets=32, default_sets=8,
        private_caches=False, extra=None,
    ):
        overrides = {
            "llc.num_sets": num_sets,
            "llc.ways": ways,
            "controller.os_principal_sets": principal,
            "controller.max_sets_per_domain": max_sets,
            "domains.default_exclusive_sets": default_sets,
            "hierarchy.private_caches": private_caches,
        }
        overrides.update(extra or {})
        return load_simulator_config(overrides=overrides)

    return make
