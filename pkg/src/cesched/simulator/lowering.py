"""Turn a mini-OpenMP program into per-thread activity streams.

Programs are executed as written.  Standard constructs get their usual
OpenMP meaning (static/dynamic/guided loops, sections, single, barriers);
the runtime idioms produced by the transformation (``initialize`` +
``doitr`` loops, core-exchange scans and progress publication) are
recognised and driven through the worklist runtime.  Serial code between
regions runs on thread 0 while the other threads wait at the next fork.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..errors import Diagnostic, InvariantViolation, ValidationError
from ..frontend import nodes as n
from ..frontend.validate import assigned_names, call_graph, reachable, used_names
from ..machine import CoreType, MachineConfig
from ..runtime import Worklist
from ..scheduler import IterationDivision, region_threads, update_scaledend
from ..transform import ITER, SCAN, TID as CES_TID
from ..workload import NTHREADS, TID, OpCounter, OpCounts, control_names, const_eval, time_on, trip_count
from .engine import Barrier, Stall, Work

MAX_PHASES = 200_000


@dataclass
class LoweringNotes:
    warnings: List[str] = field(default_factory=list)

    def warn(self, msg: str):
        if msg not in self.warnings:
            self.warnings.append(msg)


# -- shared run-time state ------------------------------------------------------

class Context:
    """Shared state of one simulated execution."""

    def __init__(self, machine: MachineConfig, n_threads: int,
                 divisions: Dict[int, IterationDivision]):
        self.machine = machine
        self.calib = machine.calibration
        self.n_threads = n_threads
        self.engine = None
        self.divisions = dict(divisions)
        self.worklists: Dict[Tuple[int, int], Worklist] = {}
        self.instance: Dict[Tuple[int, int], int] = {}
        self.dispatch: Dict[tuple, int] = {}
        self.mg = [0] * n_threads
        self.iterations: Counter = Counter()
        self.per_instance: Dict[tuple, Counter] = {}
        self.expected: Dict[tuple, int] = {}
        self.steals = 0
        self.steal_attempts = 0
        self.exchanges = 0

    def record(self, loop_key, inst, k: int):
        self.iterations[(loop_key, k)] += 1
        self.per_instance.setdefault((loop_key, inst), Counter())[k] += 1

    def verify(self):
        for key, n_itrs in self.expected.items():
            seen = self.per_instance.get(key, Counter())
            bad = [k for k, c in seen.items() if c != 1 or not 0 <= k < n_itrs]
            if bad or len(seen) != n_itrs:
                raise InvariantViolation(
                    f"loop {key[0]} instance {key[1]}: iterations not executed exactly once")


# -- iteration cost ----------------------------------------------------------------

class IterationCost:
    """Time of one iteration on each core type; uniform bodies are counted once."""

    def __init__(self, counter: OpCounter, body: Sequence, var: Optional[str], lo, step,
                 env: Mapping, calib):
        self.counter = counter
        self.body = list(body)
        self.var = var
        self.lo = lo
        self.step = step
        self.env = dict(env)
        for name in assigned_names(n.Block(tuple(body))):
            self.env.pop(name, None)
        if var is not None:
            self.env.pop(var, None)
        self.calib = calib
        blk = n.Block(tuple(body))
        as_arg = any(var in used_names(a) for x in n.walk(blk) if isinstance(x, n.Call)
                     for a in x.args) if var else False
        self.uniform = var is None or not (var in control_names(blk) or as_arg)
        self._cache: Dict[tuple, Tuple[float, float]] = {}
        if self.uniform:
            self._fixed = self._time(self.counter.block(self.body, self.env))
        else:
            # counts depend on the loop variable only through these expressions
            self._steering = [x for x in _steering_exprs(blk) if var in used_names(x)]

    def _time(self, c: OpCounts) -> Tuple[float, float]:
        return (time_on(c, CoreType.BIG, self.calib), time_on(c, CoreType.LITTLE, self.calib))

    def get(self, k: int) -> Tuple[float, float]:
        if self.uniform:
            return self._fixed
        e = dict(self.env)
        e[self.var] = self.lo + k * self.step
        vals = tuple(const_eval(x, e) for x in self._steering)
        key = ("k", k) if None in vals else vals
        hit = self._cache.get(key)
        if hit is None:
            hit = self._time(self.counter.block(self.body, e))
            self._cache[key] = hit
        return hit


def _steering_exprs(blk: n.Block) -> List[n.Expr]:
    out: List[n.Expr] = []
    for x in n.walk(blk):
        if isinstance(x, (n.If, n.WhileLoop, n.DoWhileLoop)):
            out.append(x.cond)
        elif isinstance(x, n.Switch):
            out.append(x.subject)
        elif isinstance(x, n.ForLoop):
            out += [x.init, x.bound, x.step]
        elif isinstance(x, n.Call):
            out += list(x.args)
    return out


# -- ops -----------------------------------------------------------------------------

class Op:
    def run(self, ctx: Context, t: int, inst):
        return
        yield  # pragma: no cover


@dataclass
class WorkOp(Op):
    d_big: float
    d_little: float
    label: str = "stmt"

    def run(self, ctx, t, inst):
        yield Work(self.d_big, self.d_little, self.label)


@dataclass
class BarrierOp(Op):
    key: tuple
    parties: int

    def run(self, ctx, t, inst):
        yield Barrier((inst,) + self.key, self.parties)


@dataclass
class StaticForOp(Op):
    """``schedule(static[, c])``: block or round-robin chunk distribution."""

    loop_key: tuple
    n_itrs: int
    chunk: Optional[int]
    nt: int
    cost: IterationCost

    def indices(self, t: int) -> List[int]:
        if self.chunk is None:
            q, r = divmod(self.n_itrs, self.nt)
            lo = t * q + min(t, r)
            return list(range(lo, lo + q + (1 if t < r else 0)))
        out = []
        c = self.chunk
        for start in range(t * c, self.n_itrs, self.nt * c):
            out.extend(range(start, min(start + c, self.n_itrs)))
        return out

    def run(self, ctx, t, inst):
        ctx.expected[(self.loop_key, inst)] = self.n_itrs
        label = _label(self.loop_key)
        mine = self.indices(t)
        if self.cost.uniform:
            # identical iterations: one activity for the whole share
            for k in mine:
                ctx.record(self.loop_key, inst, k)
            d = self.cost.get(0)
            yield Work(d[0] * len(mine), d[1] * len(mine), label)
            return
        for k in mine:
            ctx.record(self.loop_key, inst, k)
            d = self.cost.get(k)
            yield Work(d[0], d[1], label)


@dataclass
class DynamicForOp(Op):
    """``schedule(dynamic|guided[, c])`` through a shared dispatch counter."""

    loop_key: tuple
    n_itrs: int
    chunk: int
    nt: int
    guided: bool
    cost: IterationCost
    dispatch_cost: float = 0.0

    def run(self, ctx, t, inst):
        ctx.expected[(self.loop_key, inst)] = self.n_itrs
        key = (self.loop_key, inst)
        label = _label(self.loop_key)
        while True:
            nxt = ctx.dispatch.get(key, 0)
            left = self.n_itrs - nxt
            if left <= 0:
                return
            size = self.chunk
            if self.guided:
                size = max(self.chunk, math.ceil(left / self.nt))
            size = min(size, left)
            ctx.dispatch[key] = nxt + size
            if self.dispatch_cost > 0:
                yield Stall(self.dispatch_cost, "dispatch")
            for k in range(nxt, nxt + size):
                ctx.record(self.loop_key, inst, k)
                d = self.cost.get(k)
                yield Work(d[0], d[1], label)


@dataclass
class AssignedWorkOp(Op):
    """Sections or single as written: this thread's share, precomputed."""

    pieces: List[Tuple[float, float]]
    label: str

    def run(self, ctx, t, inst):
        for d in self.pieces:
            yield Work(d[0], d[1], self.label)


@dataclass
class InitOp(Op):
    loop_id: int
    n_itrs: int
    chunk: int
    nt: int

    def run(self, ctx, t, inst):
        k = ctx.instance.get((t, self.loop_id), 0)
        ctx.instance[(t, self.loop_id)] = k + 1
        key = (self.loop_id, k)
        if key not in ctx.worklists:
            div = ctx.divisions.get(self.loop_id)
            if div is None:
                raise InvariantViolation(f"no division for loop {self.loop_id}")
            if div.n_threads != self.nt:
                raise InvariantViolation(
                    f"loop {self.loop_id}: division for {div.n_threads} threads, team has {self.nt}")
            ctx.worklists[key] = Worklist.initialize(div, self.n_itrs, self.nt, self.chunk,
                                                     stealing=True, lock_factory=_NoLock)
            ctx.expected[(("for", self.loop_id), k)] = self.n_itrs
        return
        yield  # pragma: no cover


@dataclass
class WorklistOp(Op):
    loop_id: int
    stealing: bool
    cost: IterationCost

    def run(self, ctx, t, inst):
        k = ctx.instance.get((t, self.loop_id), 0) - 1
        wl = ctx.worklists.get((self.loop_id, k))
        if wl is None:
            raise InvariantViolation(f"loop {self.loop_id} used before initialize")
        wl.stealing = wl.stealing and self.stealing
        loop_key = ("for", self.loop_id)
        label = _label(loop_key)
        steal_cost = ctx.calib.steal_cost
        if not self.stealing and self.cost.uniform:
            lo, hi = wl.itr[t], wl.end[t]
            wl.itr[t] = hi
            wl.executed[t] += hi - lo
            for i in range(lo, hi):
                ctx.record(loop_key, k, i)
            d = self.cost.get(0)
            yield Work(d[0] * (hi - lo), d[1] * (hi - lo), label)
            return
        while True:
            before, tried = wl.stats.steals, wl.stats.attempts
            i = wl.doitr(t) if self.stealing else _private_next(wl, t)
            ctx.steal_attempts += wl.stats.attempts - tried
            if i == -1:
                return
            if wl.stats.steals != before:
                ctx.steals += 1
                if steal_cost > 0:
                    yield Stall(steal_cost, "steal")
            ctx.record(loop_key, k, i)
            d = self.cost.get(i)
            yield Work(d[0], d[1], label)


def _private_next(wl: Worklist, t: int) -> int:
    if wl.itr[t] < wl.end[t]:
        v = wl.itr[t]
        wl.itr[t] = v + 1
        wl.executed[t] += 1
        return v
    return -1


@dataclass
class UpdateOp(Op):
    loop_id: int

    def run(self, ctx, t, inst):
        k = ctx.instance.get((t, self.loop_id), 0) - 1
        wl = ctx.worklists.get((self.loop_id, k))
        if wl is not None and not getattr(wl, "_updated", False):
            wl._updated = True
            if wl.n_itrs > 0:
                ctx.divisions[self.loop_id] = update_scaledend(wl.executed, wl.n_itrs)
        return
        yield  # pragma: no cover


@dataclass
class ResetOp(Op):
    def run(self, ctx, t, inst):
        ctx.mg[t] = 0
        return
        yield  # pragma: no cover


@dataclass
class PublishOp(Op):
    pt: int

    def run(self, ctx, t, inst):
        if ctx.engine.core_type(t) is CoreType.BIG:
            ctx.mg[t] = self.pt
        return
        yield  # pragma: no cover


@dataclass
class ScanOp(Op):
    pt: int
    live: int

    def run(self, ctx, t, inst):
        eng = ctx.engine
        if eng.core_type(t) is not CoreType.LITTLE:
            return
        for i in range(ctx.n_threads):
            if i != t and ctx.mg[i] >= self.pt and eng.core_type(i) is CoreType.BIG:
                cost = ctx.calib.migration_base_cost + ctx.calib.live_var_cost * self.live
                eng.swap_threads(t, i, 0.0, cost)
                eng.counters["exchanges"] += 1
                ctx.exchanges += 1
                eng._emit(eng.threads[t].core, t, "exchange", f"with thread {i} at point {self.pt}")
                yield Stall(cost, "exchange")
                return


class _NoLock:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _label(loop_key) -> str:
    return f"{loop_key[0]}{loop_key[1]}"


# -- pattern recognition for transformed code ------------------------------------------

def _is_call(e, name) -> bool:
    return isinstance(e, n.Call) and e.func == name


def match_initialize(s):
    if isinstance(s, n.ExprStmt) and _is_call(s.expr, "initialize") and len(s.expr.args) == 3:
        table = s.expr.args[0]
        if isinstance(table, n.Name) and table.id.startswith("scaledend_"):
            return int(table.id[len("scaledend_"):]), s.expr.args[1], s.expr.args[2]
    return None


def match_worklist(s):
    """``while ((v = doitr(tid)) != -1) body`` -> (var, stealing, body)."""
    if not isinstance(s, n.WhileLoop):
        return None
    c = s.cond
    if not (isinstance(c, n.Binary) and c.op == "!=" and isinstance(c.left, n.AssignExpr)):
        return None
    call = c.left.value
    if not (isinstance(call, n.Call) and call.func in ("doitr", "doitr_private")):
        return None
    if not isinstance(c.left.target, n.Name):
        return None
    return c.left.target.id, call.func == "doitr", s.body.stmts


def match_update(s):
    if isinstance(s, n.ExprStmt) and _is_call(s.expr, "update_scaledend"):
        table = s.expr.args[0]
        if isinstance(table, n.Name) and table.id.startswith("scaledend_"):
            return int(table.id[len("scaledend_"):])
    return None


def match_reset(s) -> bool:
    return (isinstance(s, n.Assign) and s.op == "=" and isinstance(s.target, n.Index)
            and s.target.array == "mg" and s.value == n.IntLit(0))


def match_publish(s):
    if isinstance(s, n.If) and _is_call(s.cond, "inbig") and s.orelse is None:
        st = s.then.stmts
        if len(st) == 1 and isinstance(st[0], n.AtomicWrite):
            a = st[0].assign
            if isinstance(a.target, n.Index) and a.target.array == "mg" and isinstance(a.value, n.IntLit):
                return a.value.value
    return None


def match_scan(s):
    if isinstance(s, n.If) and _is_call(s.cond, "inLITTLE"):
        pt = live = None
        for x in n.walk(s.then):
            if isinstance(x, n.Binary) and x.op == ">=" and isinstance(x.left, n.Index) \
                    and x.left.array == "mg" and isinstance(x.right, n.IntLit):
                pt = x.right.value
            if _is_call(x, "migrate") and len(x.args) == 3 and isinstance(x.args[2], n.IntLit):
                live = x.args[2].value
        if pt is not None and live is not None:
            return pt, live
    return None


def scaledend_tables(program: n.Program) -> Dict[int, IterationDivision]:
    out = {}
    for g in program.globals:
        if g.name.startswith("scaledend_") and isinstance(g.init, n.ArrayInit):
            vals = []
            for v in g.init.values:
                x = const_eval(v, {})
                if x is None:
                    raise InvariantViolation(f"{g.name}: non-constant initializer")
                vals.append(float(x))
            out[int(g.name[len("scaledend_"):])] = IterationDivision(tuple(vals))
    return out


# -- lowering -------------------------------------------------------------------------------

@dataclass
class RegionTemplate:
    nt: int
    ops: List[List[Op]]

    def run(self, ctx, t, inst):
        for op in self.ops[t]:
            yield from op.run(ctx, t, inst)


@dataclass
class Phase:
    serial: Optional[Tuple[float, float]] = None
    region: Optional[RegionTemplate] = None


class Lowering:
    def __init__(self, program: n.Program, machine: MachineConfig, n_threads: Optional[int] = None,
                 section_assignments: Optional[Mapping[int, Sequence[int]]] = None,
                 dynamic_dispatch_cost: Optional[float] = None):
        self.program = program
        self.machine = machine
        self.calib = machine.calibration
        self.n_threads = n_threads
        self.assumed = machine.scheduler.assumed_trip_count
        self.counter = OpCounter(program, self.assumed)
        self.section_assignments = dict(section_assignments or {})
        self.dispatch_cost = (self.calib.steal_cost if dynamic_dispatch_cost is None
                              else dynamic_dispatch_cost)
        self.notes = LoweringNotes()
        self.functions = {f.name: f for f in program.functions}
        graph = call_graph(program)
        direct = {f.name for f in program.functions
                  if any(isinstance(x, n.ParallelRegion) for x in n.walk(f.body))}
        self.spawning = {f for f in graph if f in direct or reachable(graph, f) & direct}
        self.region_ids = {id(r): i for i, r in enumerate(
            (x for x in n.walk(program) if isinstance(x, n.ParallelRegion)), start=1)}
        self.for_ids: Dict[int, tuple] = {}
        plain = sections = 0
        ws_ordinal = 0
        self.ws_ids: Dict[int, int] = {}
        for x in n.walk(program):
            if isinstance(x, n.OmpFor):
                if x.loop.var == ITER:
                    sections += 1
                    self.for_ids[id(x)] = ("sections", sections)
                else:
                    plain += 1
                    self.for_ids[id(x)] = ("for", plain)
            if isinstance(x, (n.OmpSections, n.OmpSingle)):
                ws_ordinal += 1
                self.ws_ids[id(x)] = ws_ordinal
        self.phases: List[Phase] = []
        self._templates: Dict[tuple, RegionTemplate] = {}
        self.max_team = 1

    # program level

    def lower(self) -> List[Phase]:
        main = self.functions.get("main")
        if main is None:
            raise ValidationError([Diagnostic("<input>", 1, 1, "program has no 'main' function")])
        env = self.counter.base_env()
        self._body(main.body.stmts, env, 0)
        return self.phases

    def _has_region(self, s) -> bool:
        for x in n.walk(s):
            if isinstance(x, n.ParallelRegion):
                return True
            if isinstance(x, n.Call) and x.func in self.spawning:
                return True
        return False

    def _serial(self, c: OpCounts):
        d = (time_on(c, CoreType.BIG, self.calib), time_on(c, CoreType.LITTLE, self.calib))
        if d[0] <= 0 and d[1] <= 0:
            return
        if self.phases and self.phases[-1].serial is not None:
            prev = self.phases[-1].serial
            self.phases[-1].serial = (prev[0] + d[0], prev[1] + d[1])
        else:
            self.phases.append(Phase(serial=d))

    def _body(self, stmts, env, depth):
        for s in stmts:
            if isinstance(s, n.Return):
                if s.value is not None:
                    self._serial(self.counter.expr(s.value, env))
                return True
            if not self._has_region(s):
                self._serial(self.counter.stmt(s, env))
                continue
            if len(self.phases) > MAX_PHASES:
                raise InvariantViolation("program executes too many parallel regions to simulate")
            if isinstance(s, n.ParallelRegion):
                self._region(s, env)
            elif isinstance(s, n.Block):
                if self._body(s.stmts, env, depth):
                    return True
            elif isinstance(s, n.ForLoop):
                self._serial(self.counter.expr(s.init, env))
                trips = trip_count(s, env)
                if trips is None:
                    self.notes.warn(f"loop around a parallel region at line {s.pos[0]} has no "
                                    "constant trip count; simulated once")
                    trips = 1
                lo = const_eval(s.init, env) or 0
                step = const_eval(s.step, env) or 1
                for k in range(trips):
                    env[s.var] = lo + k * step
                    self._body(s.body.stmts, env, depth)
                    self._serial(OpCounts(alu=2, branch=1))
                for name in assigned_names(s.body):
                    env.pop(name, None)
            elif isinstance(s, n.If):
                self._serial(self.counter.cond_cost(s.cond, env))
                v = const_eval(s.cond, env)
                if v is None:
                    self.notes.warn(f"branch at line {s.pos[0]} is not constant; "
                                    "the then-arm is simulated")
                arm = s.then if (v is None or v) else s.orelse
                if arm is not None and self._body(arm.stmts, env, depth):
                    return True
            elif isinstance(s, (n.WhileLoop, n.DoWhileLoop)):
                self.notes.warn(f"loop at line {s.pos[0]} has an unknown trip count; "
                                "its body is simulated once")
                self._body(s.body.stmts, env, depth)
            else:
                self._calls(s, env, depth)
        return False

    def _calls(self, s, env, depth):
        if depth > 32:
            raise InvariantViolation("call depth limit exceeded while lowering")
        for x in n.walk(s):
            if isinstance(x, n.Call) and x.func in self.spawning:
                f = self.functions[x.func]
                callee = self.counter.base_env({})
                for p, a in zip(f.params, x.args):
                    if not p.is_array:
                        v = const_eval(a, env)
                        if v is not None:
                            callee[p.name] = v
                self._body(f.body.stmts, callee, depth + 1)
        if isinstance(s, n.Assign) and isinstance(s.target, n.Name):
            env.pop(s.target.id, None)

    # region level

    def _region(self, region: n.ParallelRegion, env):
        nt = region_threads(region, self.machine, self.n_threads, env)
        self.max_team = max(self.max_team, nt)
        key = (id(region), nt, tuple(sorted((k, v) for k, v in env.items()
                                            if isinstance(v, (int, float)))))
        tpl = self._templates.get(key)
        if tpl is None:
            tpl = RegionTemplate(nt, [self._thread_ops(region, env, t, nt) for t in range(nt)])
            self._templates[key] = tpl
        self.phases.append(Phase(region=tpl))

    def _thread_ops(self, region, env, t, nt) -> List[Op]:
        e = dict(env)
        e[TID] = t
        e[NTHREADS] = nt
        ops: List[Op] = []
        rid = self.region_ids[id(region)]
        init_args: Dict[int, tuple] = {}
        for idx, s in enumerate(region.body.stmts):
            if isinstance(s, n.Barrier):
                ops.append(BarrierOp(("b", idx), nt))
                continue
            if isinstance(s, n.OmpFor):
                ops.append(self._omp_for(s, e, nt))
                self._forget(s, e)
                if not s.nowait:
                    ops.append(BarrierOp(("w", idx), nt))
                continue
            if isinstance(s, (n.OmpSections, n.OmpSingle)):
                ops.append(self._sections(s, e, t, nt, rid))
                self._forget(s, e)
                if not s.nowait:
                    ops.append(BarrierOp(("w", idx), nt))
                continue
            m = match_initialize(s)
            if m is not None:
                loop_id, n_expr, chunk_expr = m
                n_itrs = const_eval(n_expr, e)
                if n_itrs is None:
                    self.notes.warn(f"trip count of loop {loop_id} is not a compile-time "
                                    f"constant; {self.assumed} iterations simulated")
                    n_itrs = self.assumed
                chunk = const_eval(chunk_expr, e) or 1
                ops.append(InitOp(loop_id, max(0, int(n_itrs)), int(chunk), nt))
                init_args[loop_id] = True
                last_init = loop_id
                continue
            m = match_worklist(s)
            if m is not None:
                var, stealing, body = m
                if not init_args:
                    raise InvariantViolation("worklist loop without a preceding initialize")
                cost = IterationCost(self.counter, body, var, 0, 1, e, self.calib)
                ops.append(WorklistOp(last_init, stealing, cost))
                self._forget(s, e)
                continue
            m = match_update(s)
            if m is not None:
                ops.append(UpdateOp(m))
                continue
            if match_reset(s):
                ops.append(ResetOp())
                continue
            m = match_publish(s)
            if m is not None:
                ops.append(PublishOp(m))
                continue
            m = match_scan(s)
            if m is not None:
                ops.append(ScanOp(*m))
                continue
            if isinstance(s, n.VarDecl) and s.name == CES_TID:
                continue
            c = self.counter.stmt(s, e)
            d = (time_on(c, CoreType.BIG, self.calib), time_on(c, CoreType.LITTLE, self.calib))
            ops.append(WorkOp(d[0], d[1], f"r{rid}s{idx}"))
        return ops

    @staticmethod
    def _forget(s, env):
        for name in assigned_names(s):
            env.pop(name, None)

    def _omp_for(self, s: n.OmpFor, env, nt) -> Op:
        loop = s.loop
        key = self.for_ids[id(s)]
        n_itrs = trip_count(loop, env)
        if n_itrs is None:
            self.notes.warn(f"trip count of the loop at line {loop.pos[0]} is not a compile-time "
                            f"constant; {self.assumed} iterations simulated")
            n_itrs = self.assumed
        lo = const_eval(loop.init, env)
        step = const_eval(loop.step, env) or 1
        cost = IterationCost(self.counter, loop.body.stmts, loop.var, lo or 0, step, env, self.calib)
        chunk = None
        if s.chunk is not None:
            chunk = const_eval(s.chunk, env)
            if chunk is None or chunk < 1:
                self.notes.warn(f"schedule chunk at line {s.pos[0]} is not a positive constant; using 1")
                chunk = 1
            chunk = int(chunk)
        kind = s.schedule or "static"
        if kind in ("dynamic", "guided"):
            return DynamicForOp(key, n_itrs, chunk or 1, nt, kind == "guided", cost,
                                self.dispatch_cost)
        if kind not in ("static", "auto", "runtime"):
            self.notes.warn(f"schedule({kind}) treated as static")
        return StaticForOp(key, n_itrs, chunk, nt, cost)

    def _sections(self, s, env, t, nt, rid) -> Op:
        bodies = s.sections if isinstance(s, n.OmpSections) else (s.body,)
        ordinal = self.ws_ids[id(s)]
        assign = self.section_assignments.get(ordinal)
        if assign is None:
            assign = [i % nt for i in range(len(bodies))]
        if len(assign) != len(bodies) or any(not 0 <= a < nt for a in assign):
            raise InvariantViolation(f"bad section assignment for construct {ordinal}")
        pieces = []
        for b, owner in zip(bodies, assign):
            if owner == t:
                c = self.counter.block(b.stmts, env)
                pieces.append((time_on(c, CoreType.BIG, self.calib),
                               time_on(c, CoreType.LITTLE, self.calib)))
        return AssignedWorkOp(pieces, f"sec{ordinal}")


def thread_programs(phases: List[Phase], ctx: Context, n_threads: int):
    def make(engine, t):
        for pi, ph in enumerate(phases):
            if ph.serial is not None:
                if t == 0:
                    yield Work(ph.serial[0], ph.serial[1], "serial")
                continue
            yield Barrier(("fork", pi), n_threads)
            if t < ph.region.nt:
                yield from ph.region.run(ctx, t, pi)
            yield Barrier(("join", pi), n_threads)
    return [make] * n_threads
