"""Compile-time scheduling decisions for each parallel segment."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .errors import ConfigError
from .frontend import nodes as n
from .frontend.emitter import emit_expr
from .frontend.segments import ParallelSegment, SegmentKind, partition_segments
from .frontend.validate import assigned_names, call_graph, used_names
from .machine import CalibrationTable, CoreType, MachineConfig
from .workload import (NTHREADS, TID, OpCounter, OpCounts, const_eval, estimate_all,
                       time_on, trip_count, trip_expr, wl_imbalance)

EPS = 1e-12


# -- omp for -----------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class IterationDivision:
    """Cumulative fractions of the iteration space owned by threads 0..i."""

    scaledend: Tuple[float, ...]
    n_itrs: Optional[int] = None
    symbolic: Optional[str] = None

    def __post_init__(self):
        s = self.scaledend
        if not s:
            raise ValueError("division needs at least one thread")
        if any(b < a - EPS for a, b in zip(s, s[1:])) or s[0] < -EPS or abs(s[-1] - 1.0) > 1e-9:
            raise ValueError(f"invalid scaledend {s}")

    @property
    def n_threads(self) -> int:
        return len(self.scaledend)

    def counts_for(self, n_itrs: int) -> List[int]:
        """Per-thread iteration counts for a concrete trip count."""
        ends = [_round_half_up(f * n_itrs) for f in self.scaledend]
        ends[-1] = n_itrs
        out, prev = [], 0
        for e in ends:
            e = max(prev, min(e, n_itrs))
            out.append(e - prev)
            prev = e
        return out

    @property
    def counts(self) -> List[int]:
        if self.n_itrs is None:
            raise ValueError("division is symbolic; use counts_for(n)")
        return self.counts_for(self.n_itrs)

    def ranges_for(self, n_itrs: int) -> List[Tuple[int, int]]:
        out, lo = [], 0
        for c in self.counts_for(n_itrs):
            out.append((lo, lo + c))
            lo += c
        return out

    def to_dict(self) -> dict:
        d = {"scaledend": list(self.scaledend)}
        if self.n_itrs is not None:
            d["n_itrs"] = self.n_itrs
            d["counts"] = self.counts
        if self.symbolic:
            d["symbolic"] = self.symbolic
        return d


def division_from_counts(counts: Sequence[int], symbolic: Optional[str] = None,
                         fallback: Optional[Sequence[float]] = None) -> IterationDivision:
    total = sum(counts)
    if total == 0:
        k = len(counts)
        fr = list(fallback) if fallback is not None else [(i + 1) / k for i in range(k)]
        return IterationDivision(tuple(fr), 0, symbolic)
    acc, fr = 0, []
    for c in counts:
        acc += c
        fr.append(acc / total)
    fr[-1] = 1.0
    return IterationDivision(tuple(fr), total, symbolic)


def iteration_times(cores: Sequence[CoreType], iter_counts: OpCounts,
                    calib: CalibrationTable) -> List[float]:
    return [time_on(iter_counts, ct, calib) for ct in cores]


def divide_iterations(n_itrs: Optional[int], cores: Sequence[CoreType], iter_counts: OpCounts,
                      calib: CalibrationTable, symbolic: Optional[str] = None) -> IterationDivision:
    """Speed-proportional split, rounded by largest remainder, then polished
    by single-iteration moves while the imbalance strictly decreases."""
    times = iteration_times(cores, iter_counts, calib)
    if not cores:
        raise ValueError("no threads")
    if all(t <= 0 for t in times):
        speeds = [1.0] * len(cores)
    else:
        speeds = [1.0 / t for t in times]
    total_speed = sum(speeds)
    acc, continuous = 0.0, []
    for s in speeds:
        acc += s
        continuous.append(acc / total_speed)
    continuous[-1] = 1.0
    if n_itrs is None:
        return IterationDivision(tuple(continuous), None, symbolic)
    if n_itrs < 0:
        raise ValueError("n_itrs must be non-negative")
    counts = round_split(n_itrs, speeds, times)
    return division_from_counts(counts, symbolic, fallback=continuous)


def round_split(n_itrs: int, speeds: Sequence[float], times: Sequence[float]) -> List[int]:
    ideal = [n_itrs * s / sum(speeds) for s in speeds]
    counts = [int(math.floor(x)) for x in ideal]
    short = n_itrs - sum(counts)
    order = sorted(range(len(ideal)), key=lambda i: (-(ideal[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return polish(counts, times)


def polish(counts: List[int], times: Sequence[float]) -> List[int]:
    """Greedy single-iteration moves; each accepted move strictly lowers wl_im."""
    counts = list(counts)
    k = len(counts)

    def im(c):
        return wl_imbalance([a * t for a, t in zip(c, times)])

    cur = im(counts)
    while True:
        best = None
        for j in range(k):
            if counts[j] == 0:
                continue
            for m in range(k):
                if m == j:
                    continue
                counts[j] -= 1
                counts[m] += 1
                v = im(counts)
                counts[j] += 1
                counts[m] -= 1
                if v < cur - EPS and (best is None or v < best[0] - EPS):
                    best = (v, j, m)
        if best is None:
            return counts
        cur, j, m = best
        counts[j] -= 1
        counts[m] += 1


def classify_fixed_size(iter_counts: OpCounts, calib: CalibrationTable,
                        factor: float = 0.1, max_ops: int = 3) -> bool:
    """True when stealing cannot pay for itself on this loop body."""
    if iter_counts.unknown:
        return False
    if time_on(iter_counts, CoreType.BIG, calib) < factor * calib.steal_cost:
        return True
    return iter_counts.static_ops <= max_ops


def compute_chunk(iter_counts: OpCounts, calib: CalibrationTable, n_itrs: Optional[int] = None,
                  n_threads: int = 1, factor: float = 1.0) -> int:
    t_iter = time_on(iter_counts, CoreType.BIG, calib)
    cap = None
    if n_itrs is not None:
        cap = max(1, n_itrs // (2 * n_threads))
    if t_iter <= 0:
        return cap if cap is not None else 1
    chunk = max(1, math.ceil(factor * calib.steal_cost / t_iter - 1e-9))
    if cap is not None:
        chunk = min(chunk, cap)
    return chunk


def update_scaledend(executed: Sequence[int], n_itrs: int) -> IterationDivision:
    """Division for the next entry, from how many iterations each thread ran."""
    if sum(executed) != n_itrs:
        raise ValueError(f"executed counts sum to {sum(executed)}, expected {n_itrs}")
    if any(e < 0 for e in executed):
        raise ValueError("executed counts must be non-negative")
    return division_from_counts(executed)


@dataclass(frozen=True)
class LoopPlan:
    loop_id: int
    division: IterationDivision
    chunk: int
    fixed_size: bool
    reentrant: bool
    iter_counts: OpCounts = field(default_factory=OpCounts)

    def __post_init__(self):
        if self.chunk < 1:
            raise ValueError("chunk must be >= 1")

    @property
    def stealing(self) -> bool:
        return not self.fixed_size

    def to_dict(self) -> dict:
        return {"loop_id": self.loop_id, "division": self.division.to_dict(),
                "chunk": self.chunk, "fixed_size": self.fixed_size,
                "reentrant": self.reentrant, "iteration_counts": self.iter_counts.to_dict()}


# -- omp sections ------------------------------------------------------------

@dataclass(frozen=True)
class SectionAssignment:
    thread_of: Tuple[int, ...]
    affinity: Tuple[float, ...]
    big_affine: Tuple[bool, ...]
    loads: Tuple[float, ...]
    history: Tuple[float, ...] = ()

    @property
    def n_threads(self) -> int:
        return len(self.loads)

    def sections_of(self, t: int) -> List[int]:
        return [s for s, th in enumerate(self.thread_of) if th == t]

    @property
    def max_per_thread(self) -> int:
        return max(len(self.sections_of(t)) for t in range(self.n_threads))

    @property
    def wl_im(self) -> float:
        return wl_imbalance(self.loads)

    def to_dict(self) -> dict:
        return {"thread_of": list(self.thread_of), "affinity": list(self.affinity),
                "big_affine": list(self.big_affine), "loads": list(self.loads),
                "wl_im_history": list(self.history), "max_per_thread": self.max_per_thread}


def neutral_ratio(calib: CalibrationTable) -> float:
    """Geometric mean of the LITTLE/big time ratios of ALU and memory ops."""
    b, l = calib.big, calib.little
    alu = (l.cycles_per_alu / l.frequency) / (b.cycles_per_alu / b.frequency)
    mem = (l.cycles_per_mem / l.frequency) / (b.cycles_per_mem / b.frequency)
    return math.sqrt(alu * mem)


def schedule_sections(sections: Sequence[OpCounts], cores: Sequence[CoreType],
                      calib: CalibrationTable) -> SectionAssignment:
    if not sections:
        raise ValueError("empty section list")
    if not cores:
        raise ValueError("no threads")
    wl = [{ct: time_on(s, ct, calib) for ct in CoreType} for s in sections]
    neutral = neutral_ratio(calib)
    affinity = []
    for w in wl:
        big = w[CoreType.BIG]
        affinity.append(w[CoreType.LITTLE] / big if big > 0 else neutral)
    big_affine = [a > neutral for a in affinity]
    by_type = {ct: [t for t, c in enumerate(cores) if c is ct] for ct in CoreType}

    thread_of = [-1] * len(sections)
    loads = [0.0] * len(cores)

    def preferred(s):
        want = CoreType.BIG if big_affine[s] else CoreType.LITTLE
        return by_type[want] or by_type[CoreType.LITTLE if want is CoreType.BIG else CoreType.BIG]

    # affinity allocation
    order = sorted(range(len(sections)),
                   key=lambda s: (-wl[s][CoreType.BIG if big_affine[s] else CoreType.LITTLE], s))
    for s in order:
        cands = preferred(s)
        t = min(cands, key=lambda th: (loads[th], th))
        thread_of[s] = t
        loads[t] += wl[s][cores[t]]

    # normalization
    history = [wl_imbalance(loads)]
    seen = set()
    while True:
        hi = max(range(len(cores)), key=lambda th: (loads[th], -th))
        lo = min(range(len(cores)), key=lambda th: (loads[th], th))
        mine = [s for s in range(len(sections)) if thread_of[s] == hi]
        if hi == lo or not mine:
            break
        # least affinity toward the max core's type
        if cores[hi] is CoreType.BIG:
            target = min(mine, key=lambda s: (affinity[s], s))
        else:
            target = min(mine, key=lambda s: (-affinity[s], s))
        trial = list(loads)
        trial[hi] -= wl[target][cores[hi]]
        trial[lo] += wl[target][cores[lo]]
        new_im = wl_imbalance(trial)
        key = (target, lo)
        if not new_im < history[-1] - EPS or key in seen:
            break
        seen.add(key)
        thread_of[target] = lo
        loads = trial
        history.append(new_im)
    return SectionAssignment(tuple(thread_of), tuple(affinity), tuple(big_affine),
                             tuple(loads), tuple(history))


# -- thread migration --------------------------------------------------------

@dataclass(frozen=True)
class MigrationPair:
    mp: int
    mgp: int
    c_ex: float
    live_vars: int
    est_reduction: float

    def to_dict(self) -> dict:
        return {"mp": self.mp, "mgp": self.mgp, "c_ex": self.c_ex,
                "live_vars": self.live_vars, "est_reduction": self.est_reduction}


@dataclass(frozen=True)
class MigrationPlan:
    """Ordered (migration point, minimum-guarantee point) pairs.

    Points are statement boundaries: boundary b sits after the b-th
    top-level statement of the block (1-based); boundary len(block) is
    the end of the block.
    """

    pairs: Tuple[MigrationPair, ...] = ()
    live_counts: Tuple[int, ...] = ()
    rejected: Optional[MigrationPair] = None

    @property
    def empty(self) -> bool:
        return not self.pairs

    def to_dict(self) -> dict:
        d = {"pairs": [p.to_dict() for p in self.pairs], "live_counts": list(self.live_counts)}
        if self.rejected is not None:
            d["rejected"] = self.rejected.to_dict()
        return d


def _stmt_uses_defs(s) -> Tuple[Set[str], Set[str]]:
    """(used scalars, definitely-assigned scalars) of a top-level statement."""
    uses = used_names(s)
    defs: Set[str] = set()
    if isinstance(s, n.Assign) and isinstance(s.target, n.Name):
        defs = {s.target.id}
        if s.op == "=":
            uses = used_names(s.value)
    elif isinstance(s, n.VarDecl):
        defs = {s.name}
        uses = used_names(s.init) if s.init is not None else set()
        if s.size is not None:
            uses |= used_names(s.size)
    return uses, defs


def array_names(program: Optional[n.Program], stmts=()) -> Set[str]:
    out: Set[str] = set()
    roots = list(stmts) + ([program] if program is not None else [])
    for r in roots:
        for x in n.walk(r):
            if isinstance(x, n.Index):
                out.add(x.array)
            elif isinstance(x, n.VarDecl) and x.size is not None:
                out.add(x.name)
            elif isinstance(x, n.Param) and x.is_array:
                out.add(x.name)
    return out


def live_counts(stmts: Sequence, arrays: Set[str] = frozenset()) -> List[int]:
    """Live scalar variables at each boundary 0..len(stmts) of a straight block."""
    live: Set[str] = set()
    out = [0] * (len(stmts) + 1)
    for b in range(len(stmts) - 1, -1, -1):
        uses, defs = _stmt_uses_defs(stmts[b])
        live = (live - defs) | uses
        out[b] = len(live - arrays)
    return out


def exchange_cost(live: int, calib: CalibrationTable) -> float:
    return calib.migration_base_cost + calib.live_var_cost * live


def project_block(big: Sequence[Sequence[float]], little: Sequence[Sequence[float]],
                  cores: Sequence[CoreType], pairs: Sequence[Tuple[int, int]],
                  c_ex: Sequence[float] = ()) -> Tuple[List[float], List[List[CoreType]]]:
    """Estimated finish time of each thread running a block under the
    exchange protocol, plus the core type each thread holds on arrival
    at each boundary.

    ``big[t][s]`` / ``little[t][s]``: estimated time of statement s of
    thread t on each core type.  At boundary ``mp`` of pair j a thread on
    a LITTLE core swaps cores with the first big-hosted thread that has
    published progress >= j; big-hosted threads publish j at ``mgp``.
    """
    nt = len(cores)
    k = len(big[0]) if nt else 0
    host = list(cores)
    mg = [0] * nt
    attacked = [set() for _ in range(nt)]
    finish = [0.0] * nt
    seen_types: List[List[CoreType]] = [[c] + [c] * k for c in cores]
    mp_at: Dict[int, List[int]] = {}
    mgp_at: Dict[int, List[int]] = {}
    for j, (mp, mgp) in enumerate(pairs, start=1):
        mp_at.setdefault(mp, []).append(j)
        mgp_at.setdefault(mgp, []).append(j)

    # per-thread in-flight statement: (start, end, stmt index)
    cur = [None] * nt
    version = [0] * nt
    heap: List[Tuple[float, int, int, int]] = []

    def dur(t, s):
        return (big if host[t] is CoreType.BIG else little)[t][s]

    def start(t, s, now):
        if s >= k:
            finish[t] = now
            cur[t] = None
            return
        end = now + dur(t, s)
        cur[t] = (now, end, s)
        version[t] += 1
        heapq.heappush(heap, (end, t, version[t], s + 1))

    for t in range(nt):
        start(t, 0, 0.0)

    while heap:
        now, t, ver, b = heapq.heappop(heap)
        if ver != version[t]:
            continue
        seen_types[t][b] = host[t]
        for j in mgp_at.get(b, ()):
            if host[t] is CoreType.BIG:
                mg[t] = max(mg[t], j)
        stall = 0.0
        for j in mp_at.get(b, ()):
            if host[t] is not CoreType.LITTLE or j in attacked[t]:
                continue
            attacked[t].add(j)
            for v in range(nt):
                if v != t and mg[v] >= j and host[v] is CoreType.BIG:
                    stall = c_ex[j - 1] if len(c_ex) >= j else 0.0
                    host[t], host[v] = host[v], host[t]
                    if cur[v] is not None:
                        s0, e0, sv = cur[v]
                        d_old = e0 - s0
                        frac = (e0 - now) / d_old if d_old > 0 else 0.0
                        new_end = now + stall + frac * dur(v, sv)
                        cur[v] = (now, new_end, sv)
                        version[v] += 1
                        heapq.heappush(heap, (new_end, v, version[v], sv + 1))
                    break
        start(t, b, now + stall)
    return finish, seen_types


def place_migration_points(stmts: Sequence, cores: Sequence[CoreType], calib: CalibrationTable,
                           program: Optional[n.Program] = None,
                           per_thread: Optional[List[List[OpCounts]]] = None,
                           live: Optional[Sequence[int]] = None,
                           assumed_trip: int = 100) -> MigrationPlan:
    """Choose (mp, mgp) pairs for a block executed by every thread."""
    k = len(stmts)
    nt = len(cores)
    if live is None:
        live = live_counts(stmts, array_names(program, stmts))
    live = tuple(live)
    n_big = sum(1 for c in cores if c is CoreType.BIG)
    n_little = nt - n_big
    if k < 2 or n_big == 0 or n_little == 0:
        return MigrationPlan((), live)
    if per_thread is None:
        per_thread = statement_counts(stmts, program, nt, assumed_trip)
    big = [[time_on(c, CoreType.BIG, calib) for c in row] for row in per_thread]
    little = [[time_on(c, CoreType.LITTLE, calib) for c in row] for row in per_thread]
    n_pairs = max(1, n_little // n_big)

    pairs: List[MigrationPair] = []
    rejected = None
    for _ in range(n_pairs):
        chosen = [(p.mp, p.mgp) for p in pairs]
        base, seen = project_block(big, little, cores, chosen)
        im0 = wl_imbalance(base)
        last_mp = pairs[-1].mp if pairs else 0
        last_mgp = pairs[-1].mgp if pairs else 1
        window = []
        for b in range(last_mp + 1, k):
            attackers = [t for t in range(nt) if seen[t][b] is CoreType.LITTLE]
            victims = [t for t in range(nt) if seen[t][b] is CoreType.BIG]
            if not attackers or not victims:
                continue
            budget = min(sum(big[a][b:]) for a in attackers)
            g = None
            for cand in range(max(1, last_mgp), k + 1):
                if max(sum(little[v][cand:]) for v in victims) <= budget + EPS:
                    g = cand
                    break
            if g is None:
                continue
            trial, _ = project_block(big, little, cores, chosen + [(b, g)])
            reduction = im0 - wl_imbalance(trial)
            if reduction > EPS:
                window.append((b, g, reduction))
        if not window:
            break
        viable = [w for w in window if w[2] > exchange_cost(live[w[0]], calib)]
        if not viable:
            b, g, reduction = max(window, key=lambda w: (w[2], -w[0]))
            rejected = MigrationPair(b, g, exchange_cost(live[b], calib), live[b], reduction)
            break
        b, g, reduction = min(viable, key=lambda w: (exchange_cost(live[w[0]], calib), w[0]))
        pairs.append(MigrationPair(b, g, exchange_cost(live[b], calib), live[b], reduction))
    return MigrationPlan(tuple(pairs), live, rejected)


def statement_counts(stmts: Sequence, program: Optional[n.Program], n_threads: int,
                     assumed_trip: int = 100) -> List[List[OpCounts]]:
    """Per-thread, per-statement counts with thread-id constants threaded through."""
    counter = OpCounter(program, assumed_trip)
    rows = []
    for t in range(n_threads):
        env = counter.base_env({TID: t, NTHREADS: n_threads})
        rows.append([counter.stmt(s, env) for s in stmts])
    return rows


# -- whole-program analysis ---------------------------------------------------

@dataclass
class SegmentPlan:
    region_id: int
    segment: ParallelSegment
    n_threads: int
    counts: List[OpCounts]
    loop: Optional[LoopPlan] = None
    sections: Optional[SectionAssignment] = None
    section_counts: Optional[List[OpCounts]] = None
    migration: Optional[MigrationPlan] = None

    @property
    def kind(self) -> SegmentKind:
        return self.segment.kind

    def to_dict(self, calib: CalibrationTable, cores: Sequence[CoreType]) -> dict:
        d = {"region": self.region_id, "segment": self.segment.id, "kind": self.kind.value,
             "nowait": self.segment.nowait, "n_threads": self.n_threads}
        if self.loop is not None:
            d["loop"] = self.loop.to_dict()
            d["iteration_estimate"] = estimate_all(self.loop.iter_counts, calib).to_dict()
        if self.sections is not None:
            d["sections"] = self.sections.to_dict()
            d["section_counts"] = [c.to_dict() for c in self.section_counts]
        if self.migration is not None:
            d["migration"] = self.migration.to_dict()
        d["thread_counts"] = [c.to_dict() for c in self.counts]
        d["thread_workloads"] = [time_on(c, cores[t], calib) for t, c in enumerate(self.counts)]
        d["wl_im"] = wl_imbalance(d["thread_workloads"])
        return d


@dataclass
class SchedulePlan:
    machine: MachineConfig
    segments: List[SegmentPlan] = field(default_factory=list)

    def for_region(self, region_id: int) -> List[SegmentPlan]:
        return [s for s in self.segments if s.region_id == region_id]

    def loop_plans(self) -> List[LoopPlan]:
        return [s.loop for s in self.segments if s.loop is not None]

    def to_dict(self) -> dict:
        cal = self.machine.calibration
        return {
            "machine": self.machine.name,
            "cores": [c.value for c in self.machine.cores],
            "segments": [s.to_dict(cal, self.machine.cores) for s in self.segments],
        }


def region_threads(region: n.ParallelRegion, machine: MachineConfig,
                   n_threads: Optional[int], env) -> int:
    if region.num_threads is not None:
        v = const_eval(region.num_threads, env)
        if v is None:
            raise ConfigError("num_threads clause must be a compile-time constant")
        nt = int(v)
    else:
        nt = n_threads if n_threads is not None else len(machine.cores)
    if nt < 1:
        raise ConfigError("a team needs at least one thread")
    if nt > len(machine.cores):
        raise ConfigError(f"{nt} threads exceed the {len(machine.cores)} available cores")
    return nt


def reentrant_regions(program: n.Program) -> Set[int]:
    """Ids (1-based, source order) of regions that may execute more than once."""
    graph = call_graph(program)
    sites: Dict[str, List[Tuple[str, bool]]] = {f: [] for f in graph}

    def scan(fname, node, in_loop):
        if isinstance(node, n.Call) and node.func in sites:
            sites[node.func].append((fname, in_loop))
        loopish = isinstance(node, (n.ForLoop, n.WhileLoop, n.DoWhileLoop))
        for c in node.children():
            scan(fname, c, in_loop or loopish)

    for f in program.functions:
        scan(f.name, f.body, False)

    repeated: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for f, calls in sites.items():
            if f in repeated:
                continue
            if len(calls) > 1 or any(loop or caller in repeated for caller, loop in calls):
                repeated.add(f)
                changed = True

    out: Set[int] = set()
    rid = 0

    def visit(node, fname, in_loop):
        nonlocal rid
        if isinstance(node, n.ParallelRegion):
            rid += 1
            if in_loop or fname in repeated:
                out.add(rid)
        loopish = isinstance(node, (n.ForLoop, n.WhileLoop, n.DoWhileLoop))
        for c in node.children():
            visit(c, fname, in_loop or loopish)

    for item in program.items:
        if isinstance(item, n.FunctionDef):
            visit(item.body, item.name, False)
    return out


def analyze(program: n.Program, machine: MachineConfig,
            n_threads: Optional[int] = None) -> SchedulePlan:
    """Analysis phase: counts, estimates and CES decisions for every segment."""
    cal = machine.calibration
    sp = machine.scheduler
    counter = OpCounter(program, sp.assumed_trip_count)
    genv = counter.globals_env
    plan = SchedulePlan(machine)
    reentrant = reentrant_regions(program)
    loop_id = 0
    rid = 0
    for region in [x for x in n.walk(program) if isinstance(x, n.ParallelRegion)]:
        rid += 1
        nt = region_threads(region, machine, n_threads, genv)
        cores = list(machine.cores[:nt])
        for seg in partition_segments(region, rid):
            envs = [counter.base_env({TID: t, NTHREADS: nt}) for t in range(nt)]
            if seg.kind is SegmentKind.FOR:
                loop_id += 1
                omp = seg.construct
                loop = omp.loop
                body_env = dict(genv)
                body_env.pop(loop.var, None)
                for name in assigned_names(loop.body):
                    body_env.pop(name, None)
                iter_counts = counter.block(loop.body.stmts, body_env)
                n_itrs = trip_count(loop, genv)
                symbolic = None if n_itrs is not None else n_itrs_text(loop)
                division = divide_iterations(n_itrs, cores, iter_counts, cal, symbolic)
                fixed = classify_fixed_size(iter_counts, cal, sp.fixed_size_factor,
                                            sp.fixed_size_max_ops)
                chunk = 1 if fixed else compute_chunk(iter_counts, cal, n_itrs, nt, sp.chunk_factor)
                lp = LoopPlan(loop_id, division, chunk, fixed, rid in reentrant, iter_counts)
                if n_itrs is not None:
                    per = [iter_counts.scale(c) for c in division.counts]
                else:
                    per = [iter_counts.scale(f) for f in _fractions(division)]
                plan.segments.append(SegmentPlan(rid, seg, nt, per, loop=lp))
            elif seg.kind in (SegmentKind.SECTIONS, SegmentKind.SINGLE):
                c = seg.construct
                bodies = c.sections if seg.kind is SegmentKind.SECTIONS else (c.body,)
                sec_counts = [counter.block(b.stmts, envs[0]) for b in bodies]
                assign = schedule_sections(sec_counts, cores, cal)
                per = [OpCounts()] * nt
                for s, t in enumerate(assign.thread_of):
                    per[t] = per[t] + sec_counts[s]
                plan.segments.append(SegmentPlan(rid, seg, nt, per, sections=assign,
                                                 section_counts=sec_counts))
            else:
                rows = statement_counts(seg.body, program, nt, sp.assumed_trip_count)
                per = []
                for row in rows:
                    total = OpCounts()
                    for c in row:
                        total = total + c
                    per.append(total)
                mig = place_migration_points(seg.body, cores, cal, program, rows,
                                             assumed_trip=sp.assumed_trip_count)
                plan.segments.append(SegmentPlan(rid, seg, nt, per, migration=mig))
    return plan


def _fractions(division: IterationDivision) -> List[float]:
    prev, out = 0.0, []
    for f in division.scaledend:
        out.append(f - prev)
        prev = f
    return out


def n_itrs_expr(loop: n.ForLoop):
    return trip_expr(loop)


def n_itrs_text(loop: n.ForLoop) -> str:
    return emit_expr(n_itrs_expr(loop))
