"""Simulation results and their serialisations."""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..machine import CoreType, MachineConfig
from .engine import TraceEvent


@dataclass
class SimReport:
    policy: str
    machine: str
    core_types: List[str]
    makespan: float
    busy: List[float]
    energy_per_core: List[float]
    steals: int = 0
    steal_attempts: int = 0
    migrations: int = 0
    exchanges: int = 0
    barriers: int = 0
    iterations: Counter = field(default_factory=Counter)
    trace: List[TraceEvent] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def idle(self) -> List[float]:
        return [max(0.0, self.makespan - b) for b in self.busy]

    @property
    def energy(self) -> float:
        return sum(self.energy_per_core)

    def to_dict(self) -> dict:
        return {
            "policy": self.policy, "machine": self.machine, "makespan": self.makespan,
            "energy": self.energy,
            "cores": [{"core": i, "type": ct, "busy": b, "idle": idl, "energy": e}
                      for i, (ct, b, idl, e) in enumerate(
                          zip(self.core_types, self.busy, self.idle, self.energy_per_core))],
            "steals": self.steals, "steal_attempts": self.steal_attempts,
            "migrations": self.migrations, "exchanges": self.exchanges,
            "barriers": self.barriers, "iterations_executed": sum(self.iterations.values()),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary_table(self) -> str:
        lines = [f"policy {self.policy} on {self.machine}",
                 f"makespan {self.makespan:.6g} s  energy {self.energy:.6g} J  "
                 f"steals {self.steals}  migrations {self.migrations}  exchanges {self.exchanges}",
                 f"{'core':>4} {'type':>6} {'busy':>12} {'idle':>12} {'energy':>12}"]
        for i, (ct, b, idl, e) in enumerate(zip(self.core_types, self.busy, self.idle,
                                                self.energy_per_core)):
            lines.append(f"{i:>4} {ct:>6} {b:>12.6g} {idl:>12.6g} {e:>12.6g}")
        return "\n".join(lines)

    def write_trace_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(["time", "core", "thread", "event", "detail"])
        for ev in self.trace:
            w.writerow([repr(ev.time), ev.core, ev.thread, ev.kind, ev.detail])


def core_energy(machine: MachineConfig, busy: Sequence[float], makespan: float) -> List[float]:
    cal = machine.calibration
    out = []
    for ct, b in zip(machine.cores, busy):
        p = cal.params(ct)
        out.append(p.active_power * b + p.idle_power * max(0.0, makespan - b))
    return out


def busy_from_trace(trace: Sequence[TraceEvent], n_cores: int) -> List[float]:
    """Busy time per core rebuilt from start/end events alone."""
    busy = [0.0] * n_cores
    open_at: Dict[tuple, float] = {}
    for ev in trace:
        key = (ev.core, ev.thread)
        if ev.kind == "start":
            open_at[key] = ev.time
        elif ev.kind == "end":
            busy[ev.core] += ev.time - open_at.pop(key)
    return busy


def energy_from_trace(trace: Sequence[TraceEvent], machine: MachineConfig, makespan: float) -> float:
    return sum(core_energy(machine, busy_from_trace(trace, len(machine.cores)), makespan))


@dataclass
class Comparison:
    name: str
    hmp: SimReport
    ces: SimReport

    @property
    def time_ratio(self) -> float:
        return self.ces.makespan / self.hmp.makespan if self.hmp.makespan > 0 else 1.0

    @property
    def energy_ratio(self) -> float:
        return self.ces.energy / self.hmp.energy if self.hmp.energy > 0 else 1.0

    def row(self) -> dict:
        return {"program": self.name, "hmp_time": self.hmp.makespan, "ces_time": self.ces.makespan,
                "hmp_energy": self.hmp.energy, "ces_energy": self.ces.energy,
                "norm_time": self.time_ratio, "norm_energy": self.energy_ratio,
                "ces_steals": self.ces.steals, "ces_exchanges": self.ces.exchanges,
                "hmp_migrations": self.hmp.migrations}


COMPARE_FIELDS = ["program", "hmp_time", "ces_time", "hmp_energy", "ces_energy",
                  "norm_time", "norm_energy", "ces_steals", "ces_exchanges", "hmp_migrations"]


def comparison_csv(rows: Sequence[Comparison]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COMPARE_FIELDS, lineterminator="\n")
    w.writeheader()
    for c in rows:
        r = c.row()
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
