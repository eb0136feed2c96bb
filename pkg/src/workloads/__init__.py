"""Scenario files, synthetic workload generators and attack builders."""

from src.workloads.attacks import (
    build_dynamic_allocation,
    build_occupancy_probe,
    build_prime_probe,
)
from src.workloads.generators import gen
from src.workloads.scenario import parse_scenario, serialize_scenario

__all__ = [
    "build_dynamic_allocation",
    "build_occupancy_probe",
    "build_prime_probe",
    "gen",
    "parse_scenario",
    "serialize_scenario",
]
