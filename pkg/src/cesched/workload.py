"""Static operation counts and the per-core-type time model.

Counting rules:

* each binary arithmetic, comparison, bitwise or logical operator is one ALU op;
  unary operators are one ALU op except negation of a literal;
* each array element read or write is one memory op; scalars are free;
* an ``if`` costs its condition (at least one compare), one branch, and the
  element-wise maximum of its arms; a ``switch`` likewise over its cases;
* a counted loop with trip count T costs T * (body + compare + increment + one
  back-edge branch); loops whose bound is not a compile-time constant use an
  assumed trip count and record the bound in ``symbolic_factor``;
* ``while``/``do``-``while`` loops and calls into recursive functions mark the
  counts unknown;
* calls to user functions cost the callee body, evaluated with constant
  arguments bound; math builtins have fixed ALU costs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .frontend import nodes as n
from .frontend.emitter import emit_expr
from .frontend.validate import assigned_names, recursive_functions, used_names
from .machine import CalibrationTable, CoreType

Number = float

BUILTIN_ALU = {
    "sqrt": 10, "sin": 20, "cos": 20, "tan": 25, "atan": 25, "exp": 20,
    "log": 20, "pow": 30, "fabs": 1, "abs": 1, "floor": 1, "ceil": 1, "fmod": 10,
}
FREE_CALLS = {"omp_get_thread_num", "omp_get_num_threads"}
# runtime-support primitives inserted by the transformation; the simulator
# charges their costs (steals, exchanges) explicitly
RUNTIME_CALLS = {"initialize", "update_scaledend", "doitr", "doitr_private", "getthread",
                 "migrate", "inbig", "inLITTLE", "lock_acquire", "lock_release",
                 "lock_update"}
COMPARE_OPS = {"==", "!=", "<", "<=", ">", ">=", "&&", "||"}
EXACT_TRIP_LIMIT = 4096

TID = "__tid__"
NTHREADS = "__nthreads__"


@dataclass(frozen=True)
class OpCounts:
    alu: Number = 0
    mem: Number = 0
    branch: Number = 0
    unknown: bool = False
    unknown_sites: int = 0
    symbolic_factor: Optional[str] = None

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(self.alu + other.alu, self.mem + other.mem,
                        self.branch + other.branch,
                        self.unknown or other.unknown,
                        self.unknown_sites + other.unknown_sites,
                        self.symbolic_factor or other.symbolic_factor)

    def scale(self, k: Number) -> "OpCounts":
        return OpCounts(self.alu * k, self.mem * k, self.branch * k, self.unknown,
                        self.unknown_sites, self.symbolic_factor)

    def maximum(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(max(self.alu, other.alu), max(self.mem, other.mem),
                        max(self.branch, other.branch),
                        self.unknown or other.unknown,
                        max(self.unknown_sites, other.unknown_sites),
                        self.symbolic_factor or other.symbolic_factor)

    @property
    def static_ops(self) -> Number:
        return self.alu + self.mem

    def to_dict(self) -> dict:
        d = {"alu": self.alu, "mem": self.mem, "branch": self.branch, "unknown": self.unknown}
        if self.unknown_sites:
            d["unknown_sites"] = self.unknown_sites
        if self.symbolic_factor:
            d["symbolic_factor"] = self.symbolic_factor
        return d


ZERO = OpCounts()


def unknown_counts(sites: int = 1) -> OpCounts:
    return OpCounts(unknown=True, unknown_sites=sites)


# -- constant evaluation -----------------------------------------------------

def _c_div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q = abs(a) // abs(b)
        return q if (a >= 0) == (b >= 0) else -q
    return a / b


_BINOPS = {
    "+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
    "/": _c_div, "<": lambda a, b: int(a < b), "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b), ">=": lambda a, b: int(a >= b),
    "==": lambda a, b: int(a == b), "!=": lambda a, b: int(a != b),
    "&&": lambda a, b: int(bool(a) and bool(b)), "||": lambda a, b: int(bool(a) or bool(b)),
}
_INT_BINOPS = {
    "%": lambda a, b: a - b * _c_div(a, b), "<<": lambda a, b: a << b,
    ">>": lambda a, b: a >> b, "&": lambda a, b: a & b, "|": lambda a, b: a | b,
    "^": lambda a, b: a ^ b,
}


def const_eval(e, env: Mapping[str, Number]) -> Optional[Number]:
    """Value of ``e`` under ``env`` or None when not a compile-time constant."""
    if isinstance(e, n.IntLit):
        return e.value
    if isinstance(e, n.FloatLit):
        return e.value
    if isinstance(e, n.Name):
        return env.get(e.id)
    if isinstance(e, n.Unary):
        v = const_eval(e.operand, env)
        if v is None:
            return None
        if e.op == "-":
            return -v
        if e.op == "!":
            return int(not v)
        return ~v if isinstance(v, int) else None
    if isinstance(e, n.Binary):
        a = const_eval(e.left, env)
        if a is None:
            return None
        b = const_eval(e.right, env)
        if b is None:
            return None
        try:
            if e.op in _BINOPS:
                return _BINOPS[e.op](a, b)
            if isinstance(a, int) and isinstance(b, int):
                return _INT_BINOPS[e.op](a, b)
        except (ZeroDivisionError, ValueError, OverflowError):
            return None
        return None
    if isinstance(e, n.Call):
        if e.func == "omp_get_thread_num":
            return env.get(TID)
        if e.func == "omp_get_num_threads":
            return env.get(NTHREADS)
    return None


def trip_count(loop: n.ForLoop, env: Mapping[str, Number]) -> Optional[int]:
    lo = const_eval(loop.init, env)
    hi = const_eval(loop.bound, env)
    step = const_eval(loop.step, env)
    if lo is None or hi is None or step is None or step <= 0:
        return None
    if loop.cmp == "<=":
        hi = hi + 1
    return max(0, math.ceil((hi - lo) / step))


def trip_expr(loop: n.ForLoop) -> n.Expr:
    """Trip-count expression of a canonical ``for (v = L; v < U; v += S)``."""
    lo, hi, step = loop.init, loop.bound, loop.step
    if loop.cmp == "<=":
        hi = n.Binary("+", hi, n.IntLit(1))
    span = hi if lo == n.IntLit(0) else n.Binary("-", hi, lo)
    if step == n.IntLit(1):
        return span
    return n.Binary("/", n.Binary("+", span, n.Binary("-", step, n.IntLit(1))), step)


def symbolic_trip(loop: n.ForLoop) -> str:
    return emit_expr(trip_expr(loop))


def constant_env(program: n.Program) -> Dict[str, Number]:
    """Globals with constant initialisers that are never reassigned."""
    env: Dict[str, Number] = {}
    written = set()
    for f in program.functions:
        written |= assigned_names(f.body)
    for g in program.globals:
        if g.size is None and g.init is not None and g.name not in written:
            v = const_eval(g.init, env)
            if v is not None:
                env[g.name] = v
    return env


# -- counting ----------------------------------------------------------------

class OpCounter:
    """Counts operations in AST fragments of one program."""

    def __init__(self, program: Optional[n.Program] = None, assumed_trip: int = 100):
        self.program = program
        self.assumed_trip = assumed_trip
        self.functions = {f.name: f for f in program.functions} if program else {}
        self.recursive = recursive_functions(program) if program else set()
        self.globals_env = constant_env(program) if program else {}
        self._call_cache: Dict[Tuple, OpCounts] = {}

    def base_env(self, env: Optional[Mapping[str, Number]] = None) -> Dict[str, Number]:
        out = dict(self.globals_env)
        if env:
            out.update(env)
        return out

    # expressions

    def expr(self, e, env: Mapping[str, Number]) -> OpCounts:
        if isinstance(e, (n.IntLit, n.FloatLit, n.Name)):
            return ZERO
        if isinstance(e, n.Index):
            return self.expr(e.index, env) + OpCounts(mem=1)
        if isinstance(e, n.Unary):
            inner = self.expr(e.operand, env)
            if e.op == "-" and isinstance(e.operand, (n.IntLit, n.FloatLit)):
                return inner
            return inner + OpCounts(alu=1)
        if isinstance(e, n.Binary):
            return self.expr(e.left, env) + self.expr(e.right, env) + OpCounts(alu=1)
        if isinstance(e, n.AssignExpr):
            return self.expr(e.value, env) + self.target(e.target, env, compound=False)
        if isinstance(e, n.ArrayInit):
            total = ZERO
            for v in e.values:
                total = total + self.expr(v, env)
            return total
        if isinstance(e, n.Call):
            total = ZERO
            for a in e.args:
                total = total + self.expr(a, env)
            return total + self.call(e, env)
        raise TypeError(f"not an expression: {e!r}")

    def target(self, t, env, compound: bool) -> OpCounts:
        if isinstance(t, n.Index):
            return self.expr(t.index, env) + OpCounts(mem=2 if compound else 1)
        return ZERO

    def call(self, c: n.Call, env) -> OpCounts:
        if c.func in FREE_CALLS or c.func in RUNTIME_CALLS:
            return ZERO
        if c.func in BUILTIN_ALU:
            return OpCounts(alu=BUILTIN_ALU[c.func])
        f = self.functions.get(c.func)
        if f is None:
            return OpCounts(alu=1)
        if c.func in self.recursive:
            return unknown_counts()
        callee_env = dict(self.globals_env)
        for k in (TID, NTHREADS):
            if k in env:
                callee_env[k] = env[k]
        for p, a in zip(f.params, c.args):
            if not p.is_array:
                v = const_eval(a, env)
                if v is not None:
                    callee_env[p.name] = v
        key = (c.func, tuple(sorted(callee_env.items())))
        if key not in self._call_cache:
            self._call_cache[key] = self.block(f.body.stmts, callee_env)
        return self._call_cache[key]

    # statements

    def block(self, stmts: Iterable, env: Optional[Dict[str, Number]] = None) -> OpCounts:
        """Counts of ``stmts`` on a private copy of ``env``."""
        return self.run(stmts, dict(env) if env is not None else self.base_env())

    def run(self, stmts: Iterable, env: Dict[str, Number]) -> OpCounts:
        """Counts of ``stmts``, threading constants through ``env`` in place."""
        total = ZERO
        for s in stmts:
            total = total + self.stmt(s, env)
        return total

    def stmt(self, s, env: Dict[str, Number]) -> OpCounts:
        """Counts for ``s``; updates ``env`` with constants it establishes."""
        if isinstance(s, n.Block):
            return self.run(s.stmts, env)
        if isinstance(s, n.VarDecl):
            if s.init is None:
                env.pop(s.name, None)
                return ZERO
            c = self.expr(s.init, env)
            self._bind(s.name, s.init, env, s.size is None)
            return c
        if isinstance(s, n.Assign):
            compound = s.op != "="
            c = self.expr(s.value, env) + self.target(s.target, env, compound)
            if compound:
                c = c + OpCounts(alu=1)
            if isinstance(s.target, n.Name):
                if compound:
                    cur = env.get(s.target.id)
                    val = None
                    if cur is not None:
                        val = const_eval(n.Binary(s.op[:-1], n.Name(s.target.id), s.value), env)
                    if val is None:
                        env.pop(s.target.id, None)
                    else:
                        env[s.target.id] = val
                else:
                    self._bind(s.target.id, s.value, env, True)
            return c
        if isinstance(s, n.AtomicWrite):
            return self.stmt(s.assign, env)
        if isinstance(s, n.ExprStmt):
            c = self.expr(s.expr, env)
            for x in n.walk(s.expr):
                if isinstance(x, n.AssignExpr) and isinstance(x.target, n.Name):
                    env.pop(x.target.id, None)
            return c
        if isinstance(s, n.If):
            return self.if_stmt(s, env)
        if isinstance(s, n.Switch):
            return self.switch(s, env)
        if isinstance(s, n.ForLoop):
            return self.for_loop(s, env)
        if isinstance(s, (n.WhileLoop, n.DoWhileLoop)):
            self._forget(assigned_names(s), env)
            once = self.expr(s.cond, env) + self.block(s.body.stmts, env)
            self._forget(assigned_names(s), env)
            return once + unknown_counts()
        if isinstance(s, n.Return):
            return ZERO if s.value is None else self.expr(s.value, env)
        if isinstance(s, (n.Break, n.Continue, n.Barrier)):
            return ZERO
        if isinstance(s, n.ParallelRegion):
            return self.block(s.body.stmts, env)
        if isinstance(s, n.OmpFor):
            return self.for_loop(s.loop, env)
        if isinstance(s, n.OmpSections):
            total = ZERO
            for sec in s.sections:
                total = total + self.block(sec.stmts, env)
            self._forget(assigned_names(s), env)
            return total
        if isinstance(s, n.OmpSingle):
            return self.block(s.body.stmts, env)
        raise TypeError(f"not a statement: {s!r}")

    def _bind(self, name: str, value, env, scalar: bool):
        v = const_eval(value, env) if scalar else None
        if v is None:
            env.pop(name, None)
        else:
            env[name] = v

    @staticmethod
    def _forget(names, env):
        for k in names:
            env.pop(k, None)

    def cond_cost(self, cond, env) -> OpCounts:
        c = self.expr(cond, env)
        top_is_test = (isinstance(cond, n.Binary) and cond.op in COMPARE_OPS) or (
            isinstance(cond, n.Unary) and cond.op == "!")
        if not top_is_test:
            c = c + OpCounts(alu=1)
        return c + OpCounts(branch=1)

    def if_stmt(self, s: n.If, env) -> OpCounts:
        c = self.cond_cost(s.cond, env)
        v = const_eval(s.cond, env)
        if v is not None:
            arm = s.then if v else s.orelse
            return c + (self.run(arm.stmts, env) if arm is not None else ZERO)
        then_env = dict(env)
        then_c = self.block(s.then.stmts, then_env)
        else_c = ZERO
        if s.orelse is not None:
            else_c = self.block(s.orelse.stmts, dict(env))
        self._forget(assigned_names(s), env)
        return c + then_c.maximum(else_c)

    def switch(self, s: n.Switch, env) -> OpCounts:
        c = self.expr(s.subject, env) + OpCounts(alu=1, branch=1)
        arms = [case.body for case in s.cases] + ([s.default] if s.default is not None else [])
        v = const_eval(s.subject, env)
        if v is not None:
            chosen = [case.body for case in s.cases if case.value == v]
            if not chosen and s.default is not None:
                chosen = [s.default]
            arms = chosen
        best = ZERO
        for arm in arms:
            best = best.maximum(self.block(arm.stmts, dict(env)))
        self._forget(assigned_names(s), env)
        return c + best

    def for_loop(self, loop: n.ForLoop, env) -> OpCounts:
        c = self.expr(loop.init, env)
        trips = trip_count(loop, env)
        overhead = OpCounts(alu=2, branch=1)
        written = assigned_names(loop.body)
        control = control_names(loop.body)
        symbolic = None
        if trips is None:
            trips = self.assumed_trip
            symbolic = symbolic_trip(loop)
        body_env = dict(env)
        self._forget(written | {loop.var}, body_env)
        lo = const_eval(loop.init, env)
        step = const_eval(loop.step, env)
        exact = (symbolic is None and loop.var in control and not (written & control)
                 and trips <= EXACT_TRIP_LIMIT and lo is not None)
        if exact:
            total = ZERO
            for k in range(trips):
                e = dict(body_env)
                e[loop.var] = lo + k * step
                total = total + self.block(loop.body.stmts, e) + overhead
            body = total
        else:
            body = (self.block(loop.body.stmts, body_env) + overhead).scale(trips)
        self._forget(written | {loop.var}, env)
        out = c + body
        if symbolic is not None:
            out = OpCounts(out.alu, out.mem, out.branch, out.unknown, out.unknown_sites, symbolic)
        return out


def control_names(block: n.Block) -> set:
    """Names that steer control flow inside ``block``."""
    out = set()
    for x in n.walk(block):
        if isinstance(x, (n.If, n.WhileLoop, n.DoWhileLoop)):
            out |= used_names(x.cond)
        elif isinstance(x, n.Switch):
            out |= used_names(x.subject)
        elif isinstance(x, n.ForLoop):
            out |= used_names(x.init) | used_names(x.bound) | used_names(x.step)
    return out


def count_ops(fragment, program: Optional[n.Program] = None,
              env: Optional[Mapping[str, Number]] = None, assumed_trip: int = 100) -> OpCounts:
    """Operation counts for a statement, block, statement sequence or expression."""
    counter = OpCounter(program, assumed_trip)
    e = counter.base_env(env)
    if isinstance(fragment, (list, tuple)):
        return counter.block(fragment, e)
    if isinstance(fragment, n.Block):
        return counter.block(fragment.stmts, e)
    if isinstance(fragment, (n.IntLit, n.FloatLit, n.Name, n.Index, n.Unary, n.Binary,
                             n.AssignExpr, n.Call)):
        return counter.expr(fragment, e)
    return counter.stmt(fragment, e)


# -- time model --------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """Estimated seconds of one fragment on one core type."""

    p_op: float
    p_mem: float

    @property
    def total(self) -> float:
        return self.p_op + self.p_mem


@dataclass(frozen=True)
class WorkloadEstimate:
    per_type: Dict[CoreType, Estimate] = field(default_factory=dict)

    def total(self, ct: CoreType) -> float:
        return self.per_type[ct].total

    def p_op(self, ct: CoreType) -> float:
        return self.per_type[ct].p_op

    def p_mem(self, ct: CoreType) -> float:
        return self.per_type[ct].p_mem

    def to_dict(self) -> dict:
        return {ct.label: {"p_op": e.p_op, "p_mem": e.p_mem, "total": e.total}
                for ct, e in self.per_type.items()}


def estimate(counts: OpCounts, ct: CoreType, calib: CalibrationTable) -> Estimate:
    """P(ct) = P_OP(ct) + P_MEM(ct) with branches folded into the memory term."""
    p = calib.params(ct)
    alu = counts.alu
    if counts.unknown:
        alu += calib.unknown_cost * max(1, counts.unknown_sites)
    p_op = alu * p.cycles_per_alu / p.frequency
    p_mem = (counts.mem * p.cycles_per_mem
             + counts.branch * p.branch_miss_rate * p.cycles_per_branch_miss) / p.frequency
    return Estimate(p_op, p_mem)


def estimate_all(counts: OpCounts, calib: CalibrationTable) -> WorkloadEstimate:
    return WorkloadEstimate({ct: estimate(counts, ct, calib) for ct in CoreType})


def time_on(counts: OpCounts, ct: CoreType, calib: CalibrationTable) -> float:
    return estimate(counts, ct, calib).total


@dataclass(frozen=True)
class WlImbalance:
    value: float

    @classmethod
    def of(cls, workloads: Sequence[float]) -> "WlImbalance":
        if not workloads:
            return cls(0.0)
        return cls(max(workloads) - min(workloads))


def wl_imbalance(workloads: Sequence[float]) -> float:
    return WlImbalance.of(workloads).value


@dataclass(frozen=True)
class ThreadWorkloads:
    wl: Tuple[float, ...]
    imbalance: WlImbalance


def thread_workloads(per_thread: Sequence[OpCounts], core_types: Sequence[Optional[CoreType]],
                     calib: CalibrationTable) -> ThreadWorkloads:
    """wl(i) for each thread given the core type hosting it."""
    if len(core_types) < len(per_thread):
        raise ValueError(f"thread {len(core_types)} is not mapped to a core")
    wl: List[float] = []
    for t, counts in enumerate(per_thread):
        ct = core_types[t]
        if ct is None:
            raise ValueError(f"thread {t} is not mapped to a core")
        wl.append(time_on(counts, ct, calib))
    return ThreadWorkloads(tuple(wl), WlImbalance.of(wl))


def per_thread_counts(stmts, program: Optional[n.Program], n_threads: int,
                      assumed_trip: int = 100) -> List[OpCounts]:
    """Counts of a symmetric block as seen by each thread id."""
    counter = OpCounter(program, assumed_trip)
    return [counter.block(stmts, counter.base_env({TID: t, NTHREADS: n_threads}))
            for t in range(n_threads)]
