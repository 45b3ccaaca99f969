"""Discrete-event simulation of mini-OpenMP programs on big/LITTLE machines."""
from __future__ import annotations

from dataclasses import replace
from typing import Mapping, Optional, Sequence

from ..frontend import nodes as n
from ..machine import MachineConfig
from ..scheduler import MigrationPlan, SchedulePlan, analyze
from ..workload import time_on
from ..transform import is_transformed, transform_program
from .engine import Barrier, Engine, Stall, TraceEvent, Work
from .hmp import hmp_step, make_hmp_hook
from .lowering import Context, Lowering, scaledend_tables, thread_programs
from .report import (Comparison, SimReport, busy_from_trace, comparison_csv, core_energy,
                     energy_from_trace)

POLICIES = ("hmp", "ces")


def without_migration(plan: SchedulePlan) -> SchedulePlan:
    """Copy of ``plan`` with every core-exchange plan emptied."""
    segs = [replace(s, migration=MigrationPlan((), s.migration.live_counts))
            if s.migration is not None else s for s in plan.segments]
    return replace(plan, segments=segs)


def with_section_assignments(plan: SchedulePlan,
                             assignments: Mapping[int, Sequence[int]]) -> SchedulePlan:
    """Copy of ``plan`` whose k-th sections/single construct uses ``assignments[k]``."""
    segs, k = [], 0
    cores = plan.machine.cores
    calib = plan.machine.calibration
    for s in plan.segments:
        if s.sections is not None:
            owners = assignments.get(k)
            k += 1
            if owners is not None:
                owners = tuple(int(o) for o in owners)
                if len(owners) != len(s.sections.thread_of) or \
                        any(not 0 <= o < s.n_threads for o in owners):
                    raise ValueError(f"bad section assignment {owners}")
                loads = [0.0] * s.n_threads
                for sec, o in enumerate(owners):
                    loads[o] += time_on(s.section_counts[sec], cores[o], calib)
                s = replace(s, sections=replace(s.sections, thread_of=owners,
                                                loads=tuple(loads), history=()))
        segs.append(s)
    return replace(plan, segments=segs)


def prepare(program: n.Program, machine: MachineConfig, policy: str,
            n_threads: Optional[int] = None, plan: Optional[SchedulePlan] = None,
            migration: bool = True,
            section_assignments: Optional[Mapping[int, Sequence[int]]] = None) -> n.Program:
    """The program text the policy executes: CES runs the transformed program."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "hmp" or is_transformed(program):
        return program
    if plan is None:
        plan = analyze(program, machine, n_threads)
    if not migration:
        plan = without_migration(plan)
    if section_assignments:
        plan = with_section_assignments(plan, section_assignments)
    return transform_program(program, plan)


def simulate(program: n.Program, machine: MachineConfig, policy: str = "ces",
             n_threads: Optional[int] = None, plan: Optional[SchedulePlan] = None,
             section_assignments: Optional[Mapping[int, Sequence[int]]] = None,
             migration: bool = True, trace: bool = True, verify: bool = True) -> SimReport:
    """Simulate ``program`` under ``policy``.

    ``hmp`` runs the program as written with utilisation-driven migration.
    ``ces`` runs the transformed program (transforming it first unless it
    already is) with threads pinned to their cores.  ``section_assignments``
    overrides section owners: in the CES plan, or directly for ``hmp``.
    """
    prog = prepare(program, machine, policy, n_threads, plan, migration, section_assignments)
    low = Lowering(prog, machine, n_threads, section_assignments)
    phases = low.lower()
    nt = low.max_team
    ctx = Context(machine, nt, scaledend_tables(prog))
    eng = Engine(machine, thread_programs(phases, ctx, nt), trace=trace)
    ctx.engine = eng
    if policy == "hmp":
        eng.policy_hook = make_hmp_hook(machine.hmp, machine.calibration.migration_base_cost)
        eng.tick = machine.hmp.window
    makespan = eng.run()
    if verify:
        ctx.verify()
    return SimReport(
        policy=policy, machine=machine.name, core_types=[c.value for c in machine.cores],
        makespan=makespan, busy=list(eng.busy),
        energy_per_core=core_energy(machine, eng.busy, makespan),
        steals=ctx.steals, steal_attempts=ctx.steal_attempts, migrations=eng.counters["migrations"],
        exchanges=eng.counters["exchanges"], barriers=eng.counters["barriers"],
        iterations=ctx.iterations, trace=eng.trace, warnings=list(low.notes.warnings))


def compare(program: n.Program, machine: MachineConfig, name: str = "program",
            n_threads: Optional[int] = None, trace: bool = False) -> Comparison:
    hmp = simulate(program, machine, "hmp", n_threads, trace=trace)
    ces = simulate(program, machine, "ces", n_threads, trace=trace)
    return Comparison(name, hmp, ces)


__all__ = [
    "simulate", "compare", "prepare", "without_migration", "with_section_assignments",
    "SimReport", "Comparison", "comparison_csv", "energy_from_trace", "busy_from_trace", "core_energy", "Engine",
    "Work", "Stall", "Barrier", "TraceEvent", "hmp_step", "POLICIES",
]
