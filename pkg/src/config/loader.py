"""YAML config loader with Pydantic validation for the cache simulator.

Loads cache geometry, controller and hierarchy parameters from a YAML file
whose entries carry provenance (value + unit + source + note). Dotted-key
overrides (``controller.os_principal_sets``) are applied before validation so
command-line flags take precedence over file values. Validates ranges and
cross-field rules through Pydantic, then returns frozen dataclasses for
simulation consumption.
"""

import copy
from collections.abc import Mapping
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from src.models.errors import ConfigurationError
from src.models.parameters import (
    CacheGeometry,
    ControllerConfig,
    HierarchyConfig,
    LevelConfig,
    LlcModelKind,
    ReplacementPolicy,
    SimulatorConfig,
    is_power_of_two,
)


# ---------------------------------------------------------------------------
# Pydantic validation models (range checking only)
# ---------------------------------------------------------------------------

def _check_power_of_two(value: int) -> int:
    if not is_power_of_two(value):
        raise ValueError(f"{value} is not a power of two")
    return value


class LlcValidator(BaseModel):
    """Validates the last-level cache geometry."""

    line_size_bytes: int = Field(ge=1, le=4096)
    num_sets: int = Field(ge=1, le=1 << 20)
    ways: int = Field(ge=1, le=64)
    did_bits: int = Field(ge=1, le=16)

    @field_validator("line_size_bytes", "num_sets")
    @classmethod
    def power_of_two(cls, value: int) -> int:
        return _check_power_of_two(value)


class LevelValidator(BaseModel):
    """Validates one private cache level; size must equal sets x ways x line."""

    size_bytes: int = Field(ge=1)
    num_sets: int = Field(ge=1, le=1 << 20)
    ways: int = Field(ge=1, le=64)
    hit_cycles: int = Field(ge=1, le=1000)

    @field_validator("num_sets")
    @classmethod
    def power_of_two(cls, value: int) -> int:
        return _check_power_of_two(value)


class ControllerValidator(BaseModel):
    """Validates Chunked-Cache controller parameters."""

    max_domains: int = Field(ge=1, le=1024)
    max_sets_per_domain: int = Field(ge=1)
    os_principal_sets: int | None = Field(default=None, ge=1)
    base_hit_cycles: int = Field(ge=0, le=1000)
    excl_extra_cycles: int = Field(ge=0, le=100)
    mainstream_extra_cycles: int = Field(ge=0, le=100)

    @field_validator("max_sets_per_domain", "os_principal_sets")
    @classmethod
    def power_of_two(cls, value: int | None) -> int | None:
        return value if value is None else _check_power_of_two(value)


class HierarchyValidator(BaseModel):
    """Validates memory latency and core count."""

    memory_latency_cycles: int = Field(ge=1, le=100000)
    num_cores: int = Field(ge=1, le=256)
    private_caches: bool = True


class DomainsValidator(BaseModel):
    default_exclusive_sets: int = Field(ge=1)

    @field_validator("default_exclusive_sets")
    @classmethod
    def power_of_two(cls, value: int) -> int:
        return _check_power_of_two(value)


class RunValidator(BaseModel):
    seed: int = Field(ge=0)
    policy: ReplacementPolicy = ReplacementPolicy.LRU
    llc_model: LlcModelKind = LlcModelKind.CHUNKED


class SimulatorConfigValidator(BaseModel):
    """Top-level validator with the cross-section rules."""

    llc: LlcValidator
    l1i: LevelValidator
    l1d: LevelValidator
    l2: LevelValidator
    controller: ControllerValidator
    hierarchy: HierarchyValidator
    domains: DomainsValidator
    run: RunValidator

    @model_validator(mode="after")
    def check_cross_fields(self) -> "SimulatorConfigValidator":
        line = self.llc.line_size_bytes
        for name in ("l1i", "l1d", "l2"):
            level: LevelValidator = getattr(self, name)
            if level.size_bytes != level.num_sets * level.ways * line:
                raise ValueError(
                    f"{name}: size {level.size_bytes} != sets x ways x line "
                    f"({level.num_sets} x {level.ways} x {line})"
                )
        ctrl = self.controller
        if (ctrl.os_principal_sets or 0) > self.llc.num_sets:
            raise ValueError("controller.os_principal_sets exceeds llc.num_sets")
        if ctrl.max_domains - 1 > (1 << self.llc.did_bits) - 1:
            raise ValueError("controller.max_domains does not fit in llc.did_bits")
        if self.domains.default_exclusive_sets > ctrl.max_sets_per_domain:
            raise ValueError("domains.default_exclusive_sets exceeds max_sets_per_domain")
        if self.hierarchy.private_caches:
            llc_bytes = line * self.llc.num_sets * self.llc.ways
            if not (
                llc_bytes >= self.l2.size_bytes >= max(self.l1i.size_bytes, self.l1d.size_bytes)
            ):
                raise ValueError("inclusive hierarchy requires LLC >= L2 >= L1 capacity")
        return self


# ---------------------------------------------------------------------------
# Helpers: flatten value/unit/source entries, apply dotted overrides
# ---------------------------------------------------------------------------

def _extract_values(section: dict[str, Any]) -> dict[str, Any]:
    """Extract the 'value' field of every entry in a YAML section."""
    extracted = {}
    for key, entry in section.items():
        if isinstance(entry, dict) and "value" in entry:
            extracted[key] = entry["value"]
        else:
            extracted[key] = entry
    return extracted


def _apply_overrides(
    flat: dict[str, dict[str, Any]], overrides: Mapping[str, Any]
) -> dict[str, dict[str, Any]]:
    """Apply ``section.key`` overrides; unknown sections or keys are rejected."""
    merged = copy.deepcopy(flat)
    for dotted, value in overrides.items():
        section, _, key = dotted.partition(".")
        if section not in merged or key not in merged[section]:
            raise ConfigurationError(
                f"unknown configuration key {dotted!r}", reason="UNKNOWN_KEY"
            )
        merged[section][key] = value
    return merged


_DEFAULT_YAML_PATH = Path(__file__).parent / "defaults.yaml"
_SECTIONS = ("llc", "l1i", "l1d", "l2", "controller", "hierarchy", "domains", "run")


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def load_simulator_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> SimulatorConfig:
    """Load and validate the simulator configuration from a YAML file.

    Args:
        path: Path to a config YAML. If None, uses the bundled defaults
              (16 MB / 16-way LLC, 16 domains).
        overrides: Flat mapping of dotted keys to values applied on top of
              the file before validation.

    Returns:
        A frozen SimulatorConfig.

    Raises:
        pydantic.ValidationError: If a parameter or cross-field rule fails.
        ConfigurationError: If an override names an unknown key.
        FileNotFoundError: If the specified YAML file does not exist.
        yaml.YAMLError: If the file contains invalid YAML.
    """
    yaml_path = Path(path) if path is not None else _DEFAULT_YAML_PATH

    with open(yaml_path) as f:
        raw_data = yaml.safe_load(f) or {}

    flat_data = {name: _extract_values(raw_data.get(name) or {}) for name in _SECTIONS}
    if overrides:
        flat_data = _apply_overrides(flat_data, overrides)

    validated = SimulatorConfigValidator(**flat_data)
    return _build(validated)


def _build(v: SimulatorConfigValidator) -> SimulatorConfig:
    line = v.llc.line_size_bytes

    def level(lv: LevelValidator) -> LevelConfig:
        return LevelConfig(
            geometry=CacheGeometry(line_size_bytes=line, num_sets=lv.num_sets, ways=lv.ways),
            hit_cycles=lv.hit_cycles,
        )

    llc = CacheGeometry(
        line_size_bytes=line,
        num_sets=v.llc.num_sets,
        ways=v.llc.ways,
        did_bits=v.llc.did_bits,
        policy=v.run.policy,
        seed=v.run.seed,
    )
    controller = ControllerConfig(
        geometry=llc,
        max_domains=v.controller.max_domains,
        max_sets_per_domain=v.controller.max_sets_per_domain,
        os_principal_sets=v.controller.os_principal_sets,
        base_hit_cycles=v.controller.base_hit_cycles,
        excl_extra_cycles=v.controller.excl_extra_cycles,
        mainstream_extra_cycles=v.controller.mainstream_extra_cycles,
    )
    hierarchy = HierarchyConfig(
        l1i=level(v.l1i),
        l1d=level(v.l1d),
        l2=level(v.l2),
        memory_latency_cycles=v.hierarchy.memory_latency_cycles,
        num_cores=v.hierarchy.num_cores,
        private_caches=v.hierarchy.private_caches,
    )
    return SimulatorConfig(
        controller=controller,
        hierarchy=hierarchy,
        default_exclusive_sets=v.domains.default_exclusive_sets,
        seed=v.run.seed,
        llc_model=v.run.llc_model,
    )


@lru_cache(maxsize=1)
def published_config() -> SimulatorConfig:
    """The published 16 MB / 16-way / 16-domain configuration (bundled defaults)."""
    return load_simulator_config()

