"""Scenario files: the event types and the line-oriented text format.

One directive per line, ``#`` starts a comment, tokens are whitespace
separated, addresses are hexadecimal (``0x`` prefix optional)::

    REGISTER <did> <EXCLUSIVE|MAINSTREAM> [sets=<n>] [regions=<start>-<end>,...]
    ALLOC    <did> <sets>
    DEALLOC  <did>
    RESIZE   <did> <sets>
    TEARDOWN <did>
    SWITCH   <core> <did>
    ACCESS   <core> <did> <R|W|IF> <address>
    BARRIER  <label>

Region bounds are half-open byte addresses. Parse errors carry the 1-based
line and column of the offending token.
"""

import re
from collections.abc import Iterable
from dataclasses import dataclass

from src.models.errors import ConfigurationError, ScenarioError, UsageError
from src.models.parameters import AccessOp, AddressRange, IsolationMode


@dataclass(frozen=True)
class Access:
    core: int
    did: int
    op: AccessOp
    address: int


@dataclass(frozen=True)
class Alloc:
    did: int
    ch_num: int


@dataclass(frozen=True)
class Dealloc:
    did: int


@dataclass(frozen=True)
class Resize:
    did: int
    ch_num: int


@dataclass(frozen=True)
class Register:
    did: int
    mode: IsolationMode
    sets: int | None = None
    regions: tuple[AddressRange, ...] = ()


@dataclass(frozen=True)
class Teardown:
    did: int


@dataclass(frozen=True)
class Switch:
    core: int
    did: int


@dataclass(frozen=True)
class Barrier:
    label: str

    def __post_init__(self) -> None:
        # labels must survive a format_event / parse_scenario round trip
        if not self.label or "#" in self.label or any(c.isspace() for c in self.label):
            raise UsageError(
                f"barrier label {self.label!r} must be one token without '#'", reason="LABEL"
            )


ScenarioEvent = Access | Alloc | Dealloc | Resize | Register | Teardown | Switch | Barrier

DEFAULT_MAX_ADDRESS = 1 << 48

_TOKEN = re.compile(r"\S+")
_ARITY = {
    "ACCESS": (4, 4),
    "ALLOC": (2, 2),
    "DEALLOC": (1, 1),
    "RESIZE": (2, 2),
    "REGISTER": (2, 4),
    "TEARDOWN": (1, 1),
    "SWITCH": (2, 2),
    "BARRIER": (1, 1),
}


class _Line:
    """Tokens of one scenario line with their 1-based columns."""

    def __init__(self, number: int, text: str) -> None:
        self.number = number
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text)]

    def error(self, reason: str, index: int, message: str) -> ScenarioError:
        column = self.tokens[index][1] if index < len(self.tokens) else 1
        return ScenarioError(reason, self.number, column, message)

    def count(self, index: int, minimum: int = 0) -> int:
        token = self.tokens[index][0]
        try:
            value = int(token, 10)
        except ValueError:
            raise self.error("SYNTAX", index, f"expected a decimal number, got {token!r}") from None
        if value < minimum:
            raise self.error("RANGE", index, f"{value} is below {minimum}")
        return value

    def address(self, index: int, text: str, max_address: int) -> int:
        try:
            value = int(text, 16)
        except ValueError:
            raise self.error("SYNTAX", index, f"malformed hex address {text!r}") from None
        if not 0 <= value < max_address:
            raise self.error("RANGE", index, f"address {value:#x} outside [0, {max_address:#x})")
        return value


def _parse_register(line: _Line, max_address: int) -> Register:
    did = line.count(1)
    mode_token = line.tokens[2][0].upper()
    try:
        mode = IsolationMode(mode_token)
    except ValueError:
        raise line.error("SYNTAX", 2, f"unknown isolation mode {mode_token!r}") from None
    sets = None
    regions: list[AddressRange] = []
    for index in range(3, len(line.tokens)):
        key, sep, value = line.tokens[index][0].partition("=")
        if not sep:
            raise line.error("SYNTAX", index, "expected key=value")
        if key == "sets":
            try:
                sets = int(value, 10)
            except ValueError:
                raise line.error("SYNTAX", index, f"bad set count {value!r}") from None
            if sets < 1:
                raise line.error("RANGE", index, "set count must be >= 1")
        elif key == "regions":
            for part in value.split(","):
                start, dash, end = part.partition("-")
                if not dash:
                    raise line.error("SYNTAX", index, f"bad region {part!r}")
                lo = line.address(index, start, max_address + 1)
                hi = line.address(index, end, max_address + 1)
                try:
                    regions.append(AddressRange(lo, hi))
                except ConfigurationError as exc:
                    raise line.error("RANGE", index, str(exc)) from None
        else:
            raise line.error("SYNTAX", index, f"unknown REGISTER option {key!r}")
    return Register(did=did, mode=mode, sets=sets, regions=tuple(regions))


def _parse_line(line: _Line, max_address: int) -> ScenarioEvent:
    directive = line.tokens[0][0].upper()
    arity = _ARITY.get(directive)
    if arity is None:
        raise line.error("UNKNOWN_DIRECTIVE", 0, f"unknown directive {line.tokens[0][0]!r}")
    argc = len(line.tokens) - 1
    if not arity[0] <= argc <= arity[1]:
        raise line.error(
            "SYNTAX", min(len(line.tokens) - 1, arity[1] + 1),
            f"{directive} takes {arity[0]}..{arity[1]} arguments, got {argc}",
        )

    match directive:
        case "ACCESS":
            op_token = line.tokens[3][0].upper()
            try:
                op = AccessOp(op_token)
            except ValueError:
                raise line.error("SYNTAX", 3, f"unknown operation {op_token!r}") from None
            return Access(
                core=line.count(1),
                did=line.count(2),
                op=op,
                address=line.address(4, line.tokens[4][0], max_address),
            )
        case "ALLOC":
            return Alloc(did=line.count(1), ch_num=line.count(2, minimum=1))
        case "DEALLOC":
            return Dealloc(did=line.count(1))
        case "RESIZE":
            return Resize(did=line.count(1), ch_num=line.count(2, minimum=1))
        case "REGISTER":
            return _parse_register(line, max_address)
        case "TEARDOWN":
            return Teardown(did=line.count(1))
        case "SWITCH":
            return Switch(core=line.count(1), did=line.count(2))
        case _:
            return Barrier(label=line.tokens[1][0])


def parse_scenario(
    source: str | Iterable[str], max_address: int = DEFAULT_MAX_ADDRESS
) -> list[ScenarioEvent]:
    """Parse scenario text (a string or an iterable of lines) into events."""
    lines = source.splitlines() if isinstance(source, str) else source
    events: list[ScenarioEvent] = []
    for number, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0]
        line = _Line(number, text)
        if line.tokens:
            events.append(_parse_line(line, max_address))
    return events


def format_event(event: ScenarioEvent) -> str:
    match event:
        case Access(core, did, op, address):
            return f"ACCESS {core} {did} {op.value} {address:#x}"
        case Alloc(did, ch_num):
            return f"ALLOC {did} {ch_num}"
        case Dealloc(did):
            return f"DEALLOC {did}"
        case Resize(did, ch_num):
            return f"RESIZE {did} {ch_num}"
        case Register(did, mode, sets, regions):
            parts = [f"REGISTER {did} {mode.value}"]
            if sets is not None:
                parts.append(f"sets={sets}")
            if regions:
                parts.append("regions=" + ",".join(f"{r.start:#x}-{r.end:#x}" for r in regions))
            return " ".join(parts)
        case Teardown(did):
            return f"TEARDOWN {did}"
        case Switch(core, did):
            return f"SWITCH {core} {did}"
        case Barrier(label):
            return f"BARRIER {label}"
    raise TypeError(f"not a scenario event: {event!r}")


def serialize_scenario(events: Iterable[ScenarioEvent]) -> str:
    """Render events in the scenario text format, one directive per line."""
    return "".join(format_event(e) + "\n" for e in events)
