"""Hyperparameters shared by the planner, transport, awareness and simulator.

Names follow the upper-case vocabulary used in scenario files and on the
command line (``--set CHUNK_SIZE=500000``); :meth:`Hyperparams.with_overrides`
maps them onto the dataclass fields.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Mapping


class ConfigError(ValueError):
    """Unknown or ill-typed hyperparameter."""


@dataclass(frozen=True)
class Hyperparams:
    num_root_servers: int = 9
    chunk_size: int = 1_000_000
    primary_busy_bound: int = 2
    auxiliary_queue_length: int = 1
    probe_chunk_size: int = 2_000_000
    probe_chunk_num: int = 4
    update_time: float = 5.0
    enable_awareness: bool = True
    enable_aux_path: bool = True
    update_rate: float = 0.0
    # extensions
    busy_mode: str = "inclusive"
    aux_links: str = "idle"
    default_rate: float | None = None
    max_aux_paths: int | None = None
    aggregation_cost: float = 0.0
    compute_time: float = 0.0
    control_delay: float = 0.0
    clock_offset_max: float = 0.0
    bkt_k: int = 2
    baseline_root: int = 0
    deadlock_timeout: float = 1e6

    def __post_init__(self) -> None:
        positive_ints = ("num_root_servers", "chunk_size", "primary_busy_bound",
                         "probe_chunk_num", "bkt_k")
        for name in positive_ints:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name.upper()} must be >= 1")
        if self.auxiliary_queue_length < 0:
            raise ConfigError("AUXILIARY_QUEUE_LENGTH must be >= 0")
        if self.probe_chunk_size < 0:
            raise ConfigError("PROBE_CHUNK_SIZE must be >= 0")
        if self.update_time <= 0:
            raise ConfigError("UPDATE_TIME must be positive")
        if self.update_rate != 0:
            raise ConfigError("only UPDATE_RATE=0 (refresh unconditionally) is supported")
        if self.busy_mode not in ("inclusive", "strict"):
            raise ConfigError("BUSY_MODE must be 'inclusive' or 'strict'")
        if self.aux_links not in ("idle", "all"):
            raise ConfigError("AUX_LINKS must be 'idle' or 'all'")
        if self.default_rate is not None and self.default_rate <= 0:
            raise ConfigError("DEFAULT_RATE must be positive")
        if self.max_aux_paths is not None and self.max_aux_paths < 1:
            raise ConfigError("MAX_AUX_PATHS must be >= 1")
        for name in ("aggregation_cost", "compute_time", "control_delay", "clock_offset_max"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name.upper()} must be >= 0")

    @classmethod
    def names(cls) -> list[str]:
        return [f.name.upper() for f in dataclasses.fields(cls)]

    def with_overrides(self, overrides: Mapping[str, Any]) -> "Hyperparams":
        """Return a copy with upper-case ``KEY: value`` overrides applied.

        String values (from the CLI or environment) are coerced to the
        field's type; ``NUM_NODES`` is accepted and ignored here because it
        is checked against the graph by the scenario loader.
        """
        fields = {f.name: f for f in dataclasses.fields(self)}
        changes: dict[str, Any] = {}
        for key, value in overrides.items():
            if key == "NUM_NODES":
                continue
            name = key.lower()
            if key != key.upper() or name not in fields:
                raise ConfigError(f"unknown hyperparameter {key!r}")
            changes[name] = _coerce(name, value, getattr(self, name))
        return dataclasses.replace(self, **changes)

    def as_table(self) -> dict[str, Any]:
        return {f.name.upper(): getattr(self, f.name) for f in dataclasses.fields(self)}


_OPTIONAL_FLOAT = {"default_rate"}
_OPTIONAL_INT = {"max_aux_paths"}
_BOOL = {"enable_awareness", "enable_aux_path"}
_INT = {"num_root_servers", "chunk_size", "primary_busy_bound", "auxiliary_queue_length",
        "probe_chunk_size", "probe_chunk_num", "bkt_k", "baseline_root"}


def _coerce(name: str, value: Any, current: Any) -> Any:
    try:
        if name in _BOOL:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if name in _OPTIONAL_FLOAT or name in _OPTIONAL_INT:
            if value is None or str(value).strip().lower() in ("none", "null", ""):
                return None
            return int(_number(value)) if name in _OPTIONAL_INT else float(_number(value))
        if name in _INT:
            number = _number(value)
            if number != int(number):
                raise ValueError(value)
            return int(number)
        if isinstance(current, str):
            return str(value)
        return float(_number(value))
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name.upper()}: {value!r}") from None


def _number(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(value)
    if isinstance(value, (int, float)):
        return value
    return float(str(value).replace("_", ""))
