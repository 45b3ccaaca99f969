"""Discrete-event execution of per-thread activity streams on big/LITTLE cores.

Thread programs are generators that yield timed actions (``Work``,
``Stall``) or ``Barrier`` waits; they may query and mutate shared state
through the ``Context`` between yields, which happens at the current
simulated time.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from ..errors import InvariantViolation
from ..machine import CoreType, MachineConfig


@dataclass(frozen=True)
class Work:
    d_big: float
    d_little: float
    label: str = "work"

    def duration(self, ct: CoreType) -> float:
        return self.d_big if ct is CoreType.BIG else self.d_little


@dataclass(frozen=True)
class Stall:
    duration: float
    label: str = "stall"


@dataclass(frozen=True)
class Barrier:
    key: tuple
    parties: int


@dataclass(frozen=True)
class TraceEvent:
    time: float
    core: int
    thread: int
    kind: str
    detail: str = ""


@dataclass
class _Activity:
    label: str
    d_big: float
    d_little: float
    stall: float  # fixed-duration prefix, consumed first
    fraction: float  # remaining share of the core-dependent part
    start: float = 0.0
    end: float = 0.0

    def length_on(self, ct: CoreType) -> float:
        d = self.d_big if ct is CoreType.BIG else self.d_little
        return self.stall + self.fraction * d

    def consume(self, elapsed: float, ct: CoreType):
        used = min(elapsed, self.stall)
        self.stall -= used
        elapsed -= used
        d = self.d_big if ct is CoreType.BIG else self.d_little
        if d > 0:
            self.fraction = max(0.0, self.fraction - elapsed / d)


@dataclass
class _Thread:
    tid: int
    gen: Iterator
    core: int
    activity: Optional[_Activity] = None
    blocked: bool = False
    done: bool = False
    version: int = 0
    intervals: List[Tuple[float, float]] = field(default_factory=list)


class Engine:
    """Event loop; ``policy_hook(engine, now, reason)`` runs OS-level policies."""

    def __init__(self, machine: MachineConfig, programs: List[Callable[["Engine", int], Iterator]],
                 trace: bool = True, max_events: int = 50_000_000):
        if len(programs) > len(machine.cores):
            raise InvariantViolation("more threads than cores")
        self.machine = machine
        self.cores: Tuple[CoreType, ...] = tuple(machine.cores)
        self.host: List[Optional[int]] = [None] * len(self.cores)
        self.now = 0.0
        self.busy = [0.0] * len(self.cores)
        self.trace_on = trace
        self.trace: List[TraceEvent] = []
        self.max_events = max_events
        self._heap: List[tuple] = []
        self._seq = 0
        self._barriers: Dict[tuple, List[int]] = {}
        self.policy_hook: Optional[Callable[["Engine", float, str], None]] = None
        self.tick: Optional[float] = None
        self.counters: Dict[str, int] = {"migrations": 0, "exchanges": 0, "barriers": 0}
        self.threads: List[_Thread] = []
        for t, prog in enumerate(programs):
            self.host[t] = t
            self.threads.append(_Thread(t, prog(self, t), t))

    # -- queries -------------------------------------------------------------

    def core_type(self, tid: int) -> CoreType:
        return self.cores[self.threads[tid].core]

    def is_running(self, tid: int) -> bool:
        th = self.threads[tid]
        return not th.blocked and not th.done

    def utilization(self, tid: int, window: float) -> float:
        """Busy share of the trailing window (clipped at time zero)."""
        th = self.threads[tid]
        if th.blocked or th.done:
            return 0.0
        span = min(window, self.now)
        if span <= 0:
            return 0.0
        lo = self.now - span
        busy = 0.0
        for s, e in reversed(th.intervals):
            if e <= lo:
                break
            busy += e - max(s, lo)
        if th.activity is not None:
            busy += self.now - max(th.activity.start, lo)
        return min(1.0, busy / span)

    # -- event plumbing ------------------------------------------------------------

    def _push(self, time: float, kind: str, tid: int = -1, version: int = 0):
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, kind, tid, version))

    def _emit(self, core: int, tid: int, kind: str, detail: str = ""):
        if self.trace_on:
            self.trace.append(TraceEvent(self.now, core, tid, kind, detail))

    def _start(self, th: _Thread, act: _Activity):
        ct = self.cores[th.core]
        act.start = self.now
        act.end = self.now + act.length_on(ct)
        th.activity = act
        th.version += 1
        self._emit(th.core, th.tid, "start", act.label)
        self._push(act.end, "done", th.tid, th.version)

    def _close(self, th: _Thread):
        """Account the running part of the current activity up to now."""
        act = th.activity
        elapsed = self.now - act.start
        self.busy[th.core] += elapsed
        if elapsed > 0:
            if th.intervals and abs(th.intervals[-1][1] - act.start) < 1e-15:
                th.intervals[-1] = (th.intervals[-1][0], self.now)
            else:
                th.intervals.append((act.start, self.now))
            if len(th.intervals) > 4096:
                del th.intervals[:2048]
        self._emit(th.core, th.tid, "end", act.label)
        return elapsed

    def _advance(self, th: _Thread):
        while True:
            try:
                req = next(th.gen)
            except StopIteration:
                th.done = True
                self._emit(th.core, th.tid, "exit")
                return
            if isinstance(req, Work):
                if req.d_big <= 0 and req.d_little <= 0:
                    continue
                self._start(th, _Activity(req.label, req.d_big, req.d_little, 0.0, 1.0))
                return
            if isinstance(req, Stall):
                if req.duration <= 0:
                    continue
                self._start(th, _Activity(req.label, 0.0, 0.0, req.duration, 1.0))
                return
            if isinstance(req, Barrier):
                waiting = self._barriers.setdefault(req.key, [])
                waiting.append(th.tid)
                self._emit(th.core, th.tid, "barrier", str(req.key))
                if len(waiting) > req.parties:
                    raise InvariantViolation(f"barrier {req.key} over-subscribed")
                if len(waiting) == req.parties:
                    del self._barriers[req.key]
                    self.counters["barriers"] += 1
                    for other in waiting:
                        if other != th.tid:
                            self.threads[other].blocked = False
                            self._push(self.now, "resume", other)
                    continue
                th.blocked = True
                if self.policy_hook is not None:
                    self.policy_hook(self, self.now, "barrier")
                return
            raise TypeError(f"unknown request {req!r}")

    # -- core reassignment --------------------------------------------------------

    def move(self, tid: int, core: int, cost: float = 0.0):
        """Put ``tid`` on ``core``, swapping with its current occupant.

        Running threads that change cores pay ``cost`` before resuming;
        blocked or finished threads move for free.
        """
        a = self.threads[tid]
        src = a.core
        if src == core:
            return
        other = self.host[core]
        moving = [(a, core)]
        if other is not None:
            moving.append((self.threads[other], src))
        # interrupt in-flight activities first, on their old cores
        resumed = []
        for th, dst in moving:
            if th.activity is not None:
                elapsed = self._close(th)
                th.activity.consume(elapsed, self.cores[th.core])
                resumed.append(th)
        self.host[src], self.host[core] = (other, tid)
        for th, dst in moving:
            self._emit(dst, th.tid, "migrate", f"from core {th.core}")
            th.core = dst
        for th in resumed:
            act = th.activity
            act.stall += cost
            self._start(th, act)

    def swap_threads(self, a: int, b: int, cost_a: float, cost_b: float):
        """Exchange the cores of two threads, charging each its own cost."""
        ta, tb = self.threads[a], self.threads[b]
        ca, cb = ta.core, tb.core
        resumed = []
        for th in (ta, tb):
            if th.activity is not None:
                elapsed = self._close(th)
                th.activity.consume(elapsed, self.cores[th.core])
                resumed.append(th)
        self.host[ca], self.host[cb] = b, a
        ta.core, tb.core = cb, ca
        self._emit(cb, a, "migrate", f"from core {ca}")
        self._emit(ca, b, "migrate", f"from core {cb}")
        costs = {a: cost_a, b: cost_b}
        for th in resumed:
            th.activity.stall += costs[th.tid]
            self._start(th, th.activity)

    # -- main loop -----------------------------------------------------------------

    def run(self) -> float:
        for th in self.threads:
            self._push(0.0, "resume", th.tid)
        if self.tick:
            self._push(self.tick, "tick")
        events = 0
        last = 0.0
        while self._heap:
            time, _, kind, tid, version = heapq.heappop(self._heap)
            events += 1
            if events > self.max_events:
                raise InvariantViolation("simulation exceeded its event budget")
            self.now = time
            if kind == "tick":
                if any(not th.done for th in self.threads):
                    if self.policy_hook is not None:
                        self.policy_hook(self, time, "tick")
                    self._push(time + self.tick, "tick")
                continue
            th = self.threads[tid]
            if kind == "done":
                if version != th.version or th.activity is None:
                    continue
                self._close(th)
                th.activity = None
                last = max(last, time)
            elif kind == "resume":
                if th.done:
                    continue
            self._advance(th)
            if th.done:
                last = max(last, time)
        if self._barriers:
            stuck = sorted(self._barriers)
            raise InvariantViolation(f"deadlock: threads still waiting at barriers {stuck[:3]}")
        self.now = last
        return last
