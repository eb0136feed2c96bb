"""Exception hierarchy for the cache simulator.

Every error carries a short machine-readable ``reason`` code next to the
human-readable message so tests and the CLI can branch on the failure kind
without parsing text.
"""


class SimulationError(Exception):
    """Base class for all simulator errors."""

    def __init__(self, reason: str, message: str = "") -> None:
        self.reason = reason
        super().__init__(f"{reason}: {message}" if message else reason)


class ConfigurationError(SimulationError):
    """Invalid geometry, controller configuration, or out-of-range index."""

    def __init__(self, message: str, reason: str = "CONFIGURATION") -> None:
        super().__init__(reason, message)


class UsageError(SimulationError):
    """An operation was called with arguments it cannot act on."""

    def __init__(self, message: str, reason: str = "USAGE") -> None:
        super().__init__(reason, message)


class AllocationError(SimulationError):
    """Chunk allocation, de-allocation or resize was refused.

    Reasons: ALREADY_ALLOCATED, NOT_POWER_OF_TWO, EXCEEDS_MAX,
    INSUFFICIENT_FREE_SETS, INSUFFICIENT_FREE_WAYS, NOT_ALLOCATED,
    INVALID_DOMAIN.
    """


class DomainError(SimulationError):
    """Domain registration or request stamping failed.

    Reasons: UNREGISTERED_DOMAIN, DID_IN_USE, UNKNOWN_DID, DID_RANGE,
    EXCLUSIVE_WITHOUT_CHUNK, UNMAPPED_DOMAIN, MODE_CONFLICT.
    """


class SchedulingError(SimulationError):
    """A core issued a request for a domain it is not currently running."""

    def __init__(self, message: str) -> None:
        super().__init__("CORE_DID_MISMATCH", message)


class ScenarioError(SimulationError):
    """Scenario text could not be parsed.

    Reasons: SYNTAX, UNKNOWN_DIRECTIVE, RANGE. ``line`` and ``column`` are
    1-based positions of the offending token.
    """

    def __init__(self, reason: str, line: int, column: int, message: str) -> None:
        self.line = line
        self.column = column
        super().__init__(reason, f"line {line}, column {column}: {message}")


class AnalysisError(SimulationError):
    """Statistics could not be aggregated (e.g. no accesses recorded)."""

    def __init__(self, message: str) -> None:
        super().__init__("EMPTY_STATS", message)
