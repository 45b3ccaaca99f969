"""Source-to-source rewrite that bakes scheduling decisions into the program.

The output is ordinary mini-OpenMP: the worklist runtime is emitted as
dialect functions (``getthread``, ``doitr``, ``doitr_private``) operating
on global arrays.  A handful of primitives are left external and are
supplied by the runtime library or the simulator:

``initialize(scaledend, n, chunk)``
    fill ``itr``/``end`` from the division for ``n`` iterations (the first
    caller of each loop instance does the work); also sets ``N_THREADS``
    and ``chunk``.
``update_scaledend(scaledend, n)``
    replace the division by the per-thread executed counts.
``lock_acquire(t)`` / ``lock_release(t)``
    the per-thread worklist locks.
``inbig(t)`` / ``inLITTLE(t)`` / ``migrate(a, v, live)``
    core-type queries and the core exchange of two threads.
"""
from __future__ import annotations

from dataclasses import fields, replace
from typing import Dict, List, Optional, Sequence

from .errors import Diagnostic, ValidationError
from .frontend import nodes as n
from .frontend.lexer import SourceProgram
from .frontend.parser import parse_source
from .frontend.segments import SegmentKind
from .scheduler import LoopPlan, MigrationPlan, SchedulePlan, SectionAssignment, n_itrs_expr

TID = "ces_tid"
ITER = "ces_k"
SCAN = "ces_i"

RUNTIME_GLOBALS = ("SHARED", "PRIVATE", "INITIAL_PRIVATE", "N_THREADS", "chunk",
                   "itr", "end", "status", "lock", "mg")
RUNTIME_FUNCTIONS = ("getthread", "doitr", "doitr_private", "initialize", "update_scaledend",
                     "lock_acquire", "lock_release", "lock_update", "inbig", "inLITTLE",
                     "migrate")
RESERVED = frozenset(RUNTIME_GLOBALS + RUNTIME_FUNCTIONS)
RESERVED_PREFIXES = ("ces_", "scaledend_")

STEAL_SOURCE = """
int getthread(void) {
    int best = 0;
    int k;
    for (k = 1; k < N_THREADS; k++) {
        if (end[k] - itr[k] > end[best] - itr[best]) {
            best = k;
        }
    }
    if (end[best] - itr[best] > chunk) {
        #pragma omp atomic write
        status[best] = SHARED;
        return best;
    }
    return N_THREADS;
}

int doitr(int t) {
    int v;
    if (itr[t] < end[t]) {
        if (status[t] != SHARED) {
            v = itr[t];
            itr[t] = v + 1;
            return v;
        }
        lock_acquire(t);
        v = itr[t];
        if (v < end[t]) {
            itr[t] = v + 1;
            lock_release(t);
            return v;
        }
        lock_release(t);
    }
    #pragma omp atomic write
    status[t] = PRIVATE;
    while (1) {
        int victim = getthread();
        if (victim == N_THREADS) {
            return -1;
        }
        int e = end[victim];
        int newend = e - chunk;
        lock_acquire(victim);
        if (end[victim] == e && newend > itr[victim]) {
            end[victim] = newend;
            lock_release(victim);
            lock_acquire(t);
            itr[t] = newend + 1;
            end[t] = e;
            lock_release(t);
            return newend;
        }
        lock_release(victim);
    }
    return -1;
}
"""

PRIVATE_SOURCE = """
int doitr_private(int t) {
    int v;
    if (itr[t] < end[t]) {
        v = itr[t];
        itr[t] = v + 1;
        return v;
    }
    return -1;
}
"""


def is_reserved(name: str) -> bool:
    return name in RESERVED or name.startswith(RESERVED_PREFIXES)


def reserved_uses(program: n.Program) -> List[n.Node]:
    out = []
    for x in n.walk(program):
        name = None
        if isinstance(x, n.Name):
            name = x.id
        elif isinstance(x, n.Index):
            name = x.array
        elif isinstance(x, (n.VarDecl, n.FunctionDef, n.Param)):
            name = x.name
        elif isinstance(x, n.Call):
            name = x.func
        elif isinstance(x, n.ForLoop):
            name = x.var
        if name is not None and is_reserved(name):
            out.append((name, x))
    return out


def is_transformed(program: n.Program) -> bool:
    """True when ``program`` already carries the worklist runtime."""
    names = {f.name for f in program.functions}
    calls = {x.func for x in n.walk(program) if isinstance(x, n.Call)}
    if {"doitr", "doitr_private"} & names or {"initialize", "migrate"} & calls:
        return True
    # every rewritten region declares the thread-id local
    return any(isinstance(x, n.VarDecl) and x.name == TID for x in n.walk(program))


def _runtime_functions(source: str) -> List[n.FunctionDef]:
    prog = parse_source(SourceProgram(source, "<runtime>"))
    return list(prog.functions)


# -- statement builders -------------------------------------------------------

def _call(func: str, *args) -> n.Call:
    return n.Call(func, tuple(args))


def _tid() -> n.Name:
    return n.Name(TID)


def _float(v: float) -> n.Expr:
    return n.FloatLit(float(v))


def transform_for(omp: n.OmpFor, lp: LoopPlan) -> List[n.Stmt]:
    """Worklist-driven replacement of one ``omp for``."""
    loop = omp.loop
    table = n.Name(f"scaledend_{lp.loop_id}")
    n_expr = n_itrs_expr(loop)
    out: List[n.Stmt] = []
    if loop.decl_type is not None:
        out.append(n.VarDecl(loop.decl_type, loop.var))
    out.append(n.ExprStmt(_call("initialize", table, n_expr, n.IntLit(lp.chunk))))
    out.append(n.Barrier())
    fetch = "doitr" if lp.stealing else "doitr_private"
    direct = loop.init == n.IntLit(0) and loop.step == n.IntLit(1)
    counter = n.Name(loop.var if direct else ITER)
    cond = n.Binary("!=", n.AssignExpr(counter, _call(fetch, _tid())),
                    n.Unary("-", n.IntLit(1)))
    body = list(loop.body.stmts)
    if not direct:
        out.insert(0, n.VarDecl("int", ITER))
        start = n.Binary("*", n.Name(ITER), loop.step)
        if loop.init != n.IntLit(0):
            start = n.Binary("+", loop.init, start)
        body.insert(0, n.Assign(n.Name(loop.var), start))
    out.append(n.WhileLoop(cond, n.Block(tuple(body))))
    if not omp.nowait:
        out.append(n.Barrier())
        if lp.reentrant:
            out.append(n.ExprStmt(_call("update_scaledend", table, n_expr)))
    return out


def transform_sections(bodies: Sequence[n.Block], assign: SectionAssignment,
                       nowait: bool) -> List[n.Stmt]:
    """Static round-robin ``omp for`` whose iteration k runs section
    ``k / N_THREADS`` of thread ``k % N_THREADS`` through a switch."""
    nt = assign.n_threads
    cases = []
    slot = [0] * nt
    for s, t in enumerate(assign.thread_of):
        k = slot[t] * nt + t
        slot[t] += 1
        cases.append((k, s))
    cases.sort()
    switch = n.Switch(n.Name(ITER), tuple(
        n.Case(k, n.Block(tuple(bodies[s].stmts) + (n.Break(),))) for k, s in cases))
    total = max(1, assign.max_per_thread) * nt
    loop = n.ForLoop(ITER, n.IntLit(0), "<", n.IntLit(total), n.IntLit(1),
                     n.Block((switch,)), decl_type="int")
    return [n.OmpFor(loop, schedule="static", chunk=n.IntLit(1), nowait=nowait)]


def scan_stmt(pt: int, live: int) -> n.If:
    """LITTLE-hosted threads look for a big-hosted partner past point ``pt``."""
    probe = n.Binary("&&", n.Binary(">=", n.Index("mg", n.Name(SCAN)), n.IntLit(pt)),
                     _call("inbig", n.Name(SCAN)))
    hit = n.If(probe, n.Block((n.ExprStmt(_call("migrate", _tid(), n.Name(SCAN), n.IntLit(live))),
                               n.Break())))
    loop = n.WhileLoop(n.Binary("<", n.Name(SCAN), n.Name("N_THREADS")),
                       n.Block((hit, n.Assign(n.Name(SCAN), n.IntLit(1), "+="))))
    return n.If(_call("inLITTLE", _tid()),
                n.Block((n.VarDecl("int", SCAN, None, n.IntLit(0)), loop)))


def publish_stmt(pt: int) -> n.If:
    write = n.AtomicWrite(n.Assign(n.Index("mg", _tid()), n.IntLit(pt)))
    return n.If(_call("inbig", _tid()), n.Block((write,)))


def reset_stmt() -> n.Assign:
    return n.Assign(n.Index("mg", _tid()), n.IntLit(0))


def transform_migration(stmts: Sequence[n.Stmt], mig: MigrationPlan) -> List[n.Stmt]:
    """Insert publish/scan code at the planned statement boundaries."""
    if mig is None or mig.empty:
        return list(stmts)
    out: List[n.Stmt] = [reset_stmt()]
    for b in range(len(stmts) + 1):
        if b > 0:
            out.append(stmts[b - 1])
        for j, p in enumerate(mig.pairs, start=1):
            if p.mgp == b:
                out.append(publish_stmt(j))
        for j, p in enumerate(mig.pairs, start=1):
            if p.mp == b:
                out.append(scan_stmt(j, p.live_vars))
    return out


# -- whole program --------------------------------------------------------------

def _region_body(region: n.ParallelRegion, plans) -> n.Block:
    by_segment = {p.segment.id: p for p in plans}
    out: List[n.Stmt] = [n.VarDecl("int", TID, None, _call("omp_get_thread_num"))]
    run: List[n.Stmt] = []
    seg_id = 0

    def flush():
        nonlocal seg_id
        if run:
            sp = by_segment.get(seg_id)
            out.extend(transform_migration(run, sp.migration if sp else None))
            run.clear()
            seg_id += 1

    for s in region.body.stmts:
        if isinstance(s, n.Barrier):
            flush()
            out.append(s)
        elif isinstance(s, n.WORKSHARING):
            flush()
            sp = by_segment[seg_id]
            if sp.kind is SegmentKind.FOR:
                out.extend(transform_for(s, sp.loop))
            elif sp.kind is SegmentKind.SECTIONS:
                out.extend(transform_sections(s.sections, sp.sections, s.nowait))
            else:
                out.extend(transform_sections((s.body,), sp.sections, s.nowait))
            seg_id += 1
        else:
            run.append(s)
    flush()
    return n.Block(tuple(out))


def _rewrite_regions(node, fn):
    if isinstance(node, n.ParallelRegion):
        return fn(node)
    changes = {}
    for f in fields(node):
        if f.name == "pos":
            continue
        val = getattr(node, f.name)
        if isinstance(val, n.Node):
            new = _rewrite_regions(val, fn)
            if new is not val:
                changes[f.name] = new
        elif isinstance(val, tuple) and any(isinstance(v, n.Node) for v in val):
            new = tuple(_rewrite_regions(v, fn) if isinstance(v, n.Node) else v for v in val)
            if any(a is not b for a, b in zip(new, val)):
                changes[f.name] = new
    return replace(node, **changes) if changes else node


def check_not_transformed(program: n.Program, path: str = "<input>"):
    hits = reserved_uses(program)
    if hits:
        diags = [Diagnostic(path, x.pos[0], x.pos[1],
                            f"reserved identifiers present: '{name}' belongs to the scheduling runtime"
                            + (" (input looks already transformed)" if is_transformed(program) else ""))
                 for name, x in hits[:10]]
        raise ValidationError(diags)


def transform_program(program: n.Program, plan: SchedulePlan, path: str = "<input>") -> n.Program:
    """Apply every segment decision of ``plan`` and declare the runtime once."""
    check_not_transformed(program, path)
    regions: Dict[int, list] = {}
    for sp in plan.segments:
        regions.setdefault(sp.region_id, []).append(sp)
    counter = [0]

    def on_region(region):
        counter[0] += 1
        body = _region_body(region, regions.get(counter[0], []))
        return replace(region, body=body)

    rewritten = _rewrite_regions(program, on_region)
    decls = runtime_declarations(plan)
    globals_ = [i for i in rewritten.items if isinstance(i, n.VarDecl)]
    funcs = [i for i in rewritten.items if isinstance(i, n.FunctionDef)]
    return n.Program(tuple(globals_ + decls[0] + decls[1] + funcs))


def runtime_declarations(plan: SchedulePlan):
    loops = plan.loop_plans()
    max_threads = max([s.n_threads for s in plan.segments] + [len(plan.machine.cores)])
    size = n.IntLit(max_threads)
    decls: List[n.VarDecl] = []
    funcs: List[n.FunctionDef] = []
    migrating = any(s.migration is not None and not s.migration.empty for s in plan.segments)
    if loops or migrating:
        decls.append(n.VarDecl("int", "N_THREADS", None, n.IntLit(max_threads)))
    if loops:
        decls += [n.VarDecl("int", "INITIAL_PRIVATE", None, n.IntLit(0)),
                  n.VarDecl("int", "SHARED", None, n.IntLit(1)),
                  n.VarDecl("int", "PRIVATE", None, n.IntLit(2)),
                  n.VarDecl("int", "chunk", None, n.IntLit(1)),
                  n.VarDecl("int", "itr", size), n.VarDecl("int", "end", size),
                  n.VarDecl("int", "status", size)]
        for lp in loops:
            vals = tuple(_float(v) for v in lp.division.scaledend)
            decls.append(n.VarDecl("double", f"scaledend_{lp.loop_id}",
                                   n.IntLit(len(vals)), n.ArrayInit(vals)))
        if any(lp.stealing for lp in loops):
            decls.append(n.VarDecl("int", "lock", size))
            funcs += _runtime_functions(STEAL_SOURCE)
        if any(not lp.stealing for lp in loops):
            funcs += _runtime_functions(PRIVATE_SOURCE)
    if migrating:
        decls.append(n.VarDecl("int", "mg", size))
    return decls, funcs
