"""Domain manager, cache hierarchy, replay engine and security harness."""

from src.simulation.domains import DomainManager
from src.simulation.engine import LoggedAccess, RunResult, Simulation, run_scenario
from src.simulation.hierarchy import CacheHierarchy, CoreState, amat
from src.simulation.security import (
    SuiteReport,
    differential_replay,
    run_noninterference_suite,
)

__all__ = [
    "CacheHierarchy",
    "CoreState",
    "DomainManager",
    "LoggedAccess",
    "RunResult",
    "Simulation",
    "SuiteReport",
    "amat",
    "differential_replay",
    "run_noninterference_suite",
    "run_scenario",
]
