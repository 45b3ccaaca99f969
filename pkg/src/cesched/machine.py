"""Machine description: core inventory plus the per-core-type calibration table."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from importlib import resources
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError

SCHEMA_VERSION = 1


class CoreType(str, Enum):
    BIG = "big"
    LITTLE = "little"

    @property
    def label(self) -> str:
        return "big" if self is CoreType.BIG else "LITTLE"


@dataclass(frozen=True)
class CoreParams:
    cycles_per_alu: float
    cycles_per_mem: float
    cycles_per_branch_miss: float
    branch_miss_rate: float
    frequency: float
    active_power: float
    idle_power: float
    min_frequency: Optional[float] = None
    max_frequency: Optional[float] = None

    def check(self, name: str):
        for k in ("cycles_per_alu", "cycles_per_mem", "cycles_per_branch_miss",
                  "frequency", "active_power", "idle_power"):
            if not getattr(self, k) > 0:
                raise ConfigError(f"{name}.{k} must be positive")
        if not 0.0 <= self.branch_miss_rate <= 1.0:
            raise ConfigError(f"{name}.branch_miss_rate must lie in [0, 1]")
        lo, hi = self.min_frequency, self.max_frequency
        if lo is not None and hi is not None and lo > hi:
            raise ConfigError(f"{name}: min_frequency exceeds max_frequency")
        if (lo is not None and self.frequency < lo) or (hi is not None and self.frequency > hi):
            raise ConfigError(f"{name}.frequency {self.frequency:g} Hz outside [{lo:g}, {hi:g}]")


@dataclass(frozen=True)
class CalibrationTable:
    big: CoreParams
    little: CoreParams
    steal_cost: float
    migration_base_cost: float
    live_var_cost: float
    unknown_cost: float = 1e6

    def __post_init__(self):
        self.big.check("big")
        self.little.check("little")
        for k in ("steal_cost", "migration_base_cost", "live_var_cost"):
            if getattr(self, k) < 0:
                raise ConfigError(f"{k} must be non-negative")
        if not self.unknown_cost > 0:
            raise ConfigError("unknown_cost must be positive")

    def params(self, ct: CoreType) -> CoreParams:
        return self.big if ct is CoreType.BIG else self.little

    def with_frequency(self, ct: CoreType, hz: float) -> "CalibrationTable":
        if ct is CoreType.BIG:
            return replace(self, big=replace(self.big, frequency=hz))
        return replace(self, little=replace(self.little, frequency=hz))


@dataclass(frozen=True)
class HmpParams:
    window: float = 0.032
    up_threshold: float = 0.8
    down_threshold: float = 0.3


@dataclass(frozen=True)
class SchedulerParams:
    fixed_size_factor: float = 0.1
    fixed_size_max_ops: int = 3
    chunk_factor: float = 1.0
    assumed_trip_count: int = 100


@dataclass(frozen=True)
class MachineConfig:
    """Core inventory; core i hosts thread i."""

    calibration: CalibrationTable
    cores: Tuple[CoreType, ...]
    hmp: HmpParams = field(default_factory=HmpParams)
    scheduler: SchedulerParams = field(default_factory=SchedulerParams)
    name: str = "machine"

    def __post_init__(self):
        if not self.cores:
            raise ConfigError("machine needs at least one core")

    @property
    def n_big(self) -> int:
        return sum(1 for c in self.cores if c is CoreType.BIG)

    @property
    def n_little(self) -> int:
        return sum(1 for c in self.cores if c is CoreType.LITTLE)

    def with_counts(self, n_big: int, n_little: int) -> "MachineConfig":
        return replace(self, cores=layout(n_big, n_little),
                       name=f"{n_big}b{n_little}L")

    def with_frequencies(self, big: Optional[float] = None,
                         little: Optional[float] = None) -> "MachineConfig":
        cal = self.calibration
        if big is not None:
            cal = cal.with_frequency(CoreType.BIG, big)
        if little is not None:
            cal = cal.with_frequency(CoreType.LITTLE, little)
        return replace(self, calibration=cal)

    def to_dict(self) -> dict:
        cal = self.calibration
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "cores": {"big": self.n_big, "little": self.n_little},
            "order": [c.value for c in self.cores],
            "core_types": {"big": _drop_none(asdict(cal.big)), "little": _drop_none(asdict(cal.little))},
            "steal_cost": cal.steal_cost,
            "migration_base_cost": cal.migration_base_cost,
            "live_var_cost": cal.live_var_cost,
            "unknown_cost": cal.unknown_cost,
            "scheduler": asdict(self.scheduler),
            "hmp": asdict(self.hmp),
        }


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def layout(n_big: int, n_little: int) -> Tuple[CoreType, ...]:
    """Big cores first, matching the numbering used in the worked examples."""
    if n_big < 0 or n_little < 0 or n_big + n_little == 0:
        raise ConfigError("need a non-negative core count with at least one core")
    return (CoreType.BIG,) * n_big + (CoreType.LITTLE,) * n_little


_TOP_KEYS = {"schema", "name", "cores", "order", "core_types", "steal_cost",
             "migration_base_cost", "live_var_cost", "unknown_cost", "scheduler", "hmp"}
_CORE_KEYS = set(CoreParams.__dataclass_fields__)


def _check_keys(d: dict, allowed, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def machine_from_dict(d: dict) -> MachineConfig:
    _check_keys(d, _TOP_KEYS, "machine config")
    if d.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported machine schema {d.get('schema')!r} (expected {SCHEMA_VERSION})")
    try:
        ct = d["core_types"]
        _check_keys(ct, {"big", "little"}, "core_types")
        params = {}
        for name in ("big", "little"):
            _check_keys(ct[name], _CORE_KEYS, f"core_types.{name}")
            params[name] = CoreParams(**ct[name])
        cal = CalibrationTable(
            big=params["big"], little=params["little"],
            steal_cost=float(d["steal_cost"]),
            migration_base_cost=float(d["migration_base_cost"]),
            live_var_cost=float(d["live_var_cost"]),
            unknown_cost=float(d.get("unknown_cost", 1e6)),
        )
        counts = d["cores"]
        _check_keys(counts, {"big", "little"}, "cores")
        if "order" in d:
            cores = tuple(CoreType(c) for c in d["order"])
            if (sum(c is CoreType.BIG for c in cores) != counts.get("big", 0)
                    or sum(c is CoreType.LITTLE for c in cores) != counts.get("little", 0)):
                raise ConfigError("'order' disagrees with 'cores' counts")
        else:
            cores = layout(int(counts.get("big", 0)), int(counts.get("little", 0)))
        sched = d.get("scheduler", {})
        _check_keys(sched, SchedulerParams.__dataclass_fields__, "scheduler")
        hmp = d.get("hmp", {})
        _check_keys(hmp, HmpParams.__dataclass_fields__, "hmp")
    except KeyError as e:
        raise ConfigError(f"missing key in machine config: {e.args[0]}") from None
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad machine config: {e}") from None
    return MachineConfig(cal, cores, HmpParams(**hmp), SchedulerParams(**sched),
                         d.get("name", "machine"))


def load_machine(path) -> MachineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read machine file {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from None
    return machine_from_dict(data)


def default_machine() -> MachineConfig:
    """The bundled 4 big + 4 LITTLE Exynos-like configuration."""
    text = resources.files("cesched.data").joinpath("default_machine.json").read_text()
    return machine_from_dict(json.loads(text))


def toy_machine() -> MachineConfig:
    """Abstract 2 big + 2 LITTLE machine of the worked omp_for example.

    One ALU op is one iteration; big runs at speed 2.5 and LITTLE at 1,
    in arbitrary time units, with all overheads zero.
    """
    text = resources.files("cesched.data").joinpath("toy_machine.json").read_text()
    return machine_from_dict(json.loads(text))


def core_types_for(machine: MachineConfig, n_threads: Optional[int] = None) -> List[CoreType]:
    """Core type hosting each thread under the initial thread-i-on-core-i binding."""
    n = len(machine.cores) if n_threads is None else n_threads
    if n < 1:
        raise ConfigError("need at least one thread")
    if n > len(machine.cores):
        raise ConfigError(f"{n} threads exceed the {len(machine.cores)} available cores")
    return list(machine.cores[:n])


def frequency_ok(params: CoreParams, hz: float) -> bool:
    lo, hi = params.min_frequency, params.max_frequency
    return (lo is None or hz >= lo) and (hi is None or hz <= hi)


def counts_of(cores) -> Dict[CoreType, int]:
    out = {CoreType.BIG: 0, CoreType.LITTLE: 0}
    for c in cores:
        out[c] += 1
    return out
