"""Per-thread worklists with work stealing for transformed ``omp for`` loops.

Each thread owns the iteration range ``[itr, end)``.  The owner advances
``itr`` without locking while its status is private; a thief first marks
the victim SHARED, then shortens ``end`` by one chunk under the victim's
lock.  The owner takes the lock only once it has seen SHARED, so the
common path stays lock-free.
"""
from __future__ import annotations

import heapq
import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import InvariantViolation


class Status(IntEnum):
    INITIAL_PRIVATE = 0
    SHARED = 1
    PRIVATE = 2


ALLOWED_TRANSITIONS = {
    (Status.INITIAL_PRIVATE, Status.SHARED),
    (Status.INITIAL_PRIVATE, Status.PRIVATE),
    (Status.SHARED, Status.PRIVATE),
    (Status.PRIVATE, Status.SHARED),
}


@dataclass
class StealStats:
    attempts: int = 0
    steals: int = 0
    failed: int = 0
    stolen_iterations: int = 0
    locked_advances: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def lock_update(values: List[int], idx: int, new: int, lock) -> int:
    """Store ``new`` into ``values[idx]`` under ``lock`` and return the old value."""
    with lock:
        old = values[idx]
        values[idx] = new
    return old


class Worklist:
    """Shared worklist state of one execution of one transformed loop."""

    def __init__(self, n_threads: int, counts: Sequence[int], chunk: int = 1,
                 stealing: bool = True, record: bool = False, lock_factory=threading.Lock):
        if len(counts) != n_threads:
            raise ValueError("one iteration count per thread is required")
        if chunk < 1:
            raise ValueError("chunk must be >= 1")
        self.n_threads = n_threads
        self.chunk = chunk
        self.stealing = stealing
        self.n_itrs = sum(counts)
        self.itr: List[int] = []
        self.end: List[int] = []
        lo = 0
        for c in counts:
            self.itr.append(lo)
            self.end.append(lo + c)
            lo += c
        self.status: List[Status] = [Status.INITIAL_PRIVATE] * n_threads
        self.lock = [lock_factory() for _ in range(n_threads)]
        self.stats = StealStats()
        self.executed: List[int] = [0] * n_threads
        self.record = record
        self.transitions: List[Tuple[int, Status, Status]] = []
        self._stats_lock = lock_factory()

    @classmethod
    def initialize(cls, division, n_itrs: int, n_threads: int, chunk: int = 1,
                   stealing: bool = True, **kw) -> "Worklist":
        """Fill ``itr``/``end`` from a division's scaledend for ``n_itrs`` iterations."""
        if division.n_threads != n_threads:
            raise ValueError(f"division is for {division.n_threads} threads, not {n_threads}")
        return cls(n_threads, division.counts_for(n_itrs), chunk, stealing, **kw)

    # status bookkeeping

    def _set_status(self, t: int, new: Status):
        old = self.status[t]
        if old == new:
            return
        if (old, new) not in ALLOWED_TRANSITIONS:
            raise InvariantViolation(f"illegal status transition {old.name} -> {new.name} on {t}")
        self.status[t] = new
        if self.record:
            self.transitions.append((t, old, new))

    def remaining(self, t: int) -> int:
        return max(0, self.end[t] - self.itr[t])

    # runtime operations

    def getthread(self) -> int:
        """Thread with the most iterations left if worth stealing from, else n_threads."""
        best = 0
        best_left = self.end[0] - self.itr[0]
        for k in range(1, self.n_threads):
            left = self.end[k] - self.itr[k]
            if left > best_left:
                best, best_left = k, left
        if best_left > self.chunk:
            self._set_status(best, Status.SHARED)
            return best
        return self.n_threads

    def doitr(self, t: int) -> int:
        """Next iteration index for thread ``t`` or -1 when the loop is exhausted."""
        if self.itr[t] < self.end[t]:
            if self.status[t] != Status.SHARED:
                v = self.itr[t]
                self.itr[t] = v + 1
                self.executed[t] += 1
                return v
            with self.lock[t]:
                v = self.itr[t]
                ok = v < self.end[t]
                if ok:
                    self.itr[t] = v + 1
            if ok:
                self.executed[t] += 1
                with self._stats_lock:
                    self.stats.locked_advances += 1
                return v
        if not self.stealing:
            return -1
        self._set_status(t, Status.PRIVATE)
        while True:
            victim = self.getthread()
            if victim == self.n_threads:
                return -1
            got = self.steal(t, victim)
            if got != -1:
                self.executed[t] += 1
                return got

    def steal(self, t: int, victim: int) -> int:
        """Move the last chunk of ``victim``'s range to ``t``; first index or -1."""
        e = self.end[victim]
        newend = e - self.chunk
        with self.lock[victim]:
            # the owner may be past any unlocked read, so require a gap
            ok = self.end[victim] == e and newend > self.itr[victim]
            if ok:
                self.end[victim] = newend
        with self._stats_lock:
            self.stats.attempts += 1
            if ok:
                self.stats.steals += 1
                self.stats.stolen_iterations += self.chunk
            else:
                self.stats.failed += 1
        if not ok:
            return -1
        with self.lock[t]:
            self.itr[t] = newend + 1
            self.end[t] = e
        return newend


def run_parallel_for(worklist: Worklist, body: Callable[[int, int], None],
                     executor: str = "threads",
                     cost: Optional[Callable[[int, int], float]] = None,
                     steal_cost: float = 0.0) -> Dict[int, List[int]]:
    """Drive every thread through ``doitr`` until the loop is exhausted.

    ``executor="threads"`` uses real OS threads; ``"simulated"`` interleaves
    the threads deterministically in simulated time, where ``cost(tid, i)``
    is the time thread ``tid`` spends on iteration ``i``.  Returns the
    iterations executed by each thread.
    """
    done: Dict[int, List[int]] = {t: [] for t in range(worklist.n_threads)}
    if executor == "threads":
        def worker(t):
            while True:
                i = worklist.doitr(t)
                if i == -1:
                    return
                body(t, i)
                done[t].append(i)

        threads = [threading.Thread(target=worker, args=(t,)) for t in range(worklist.n_threads)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        return done
    if executor != "simulated":
        raise ValueError(f"unknown executor {executor!r}")
    cost = cost or (lambda t, i: 1.0)
    heap = [(0.0, t) for t in range(worklist.n_threads)]
    heapq.heapify(heap)
    while heap:
        now, t = heapq.heappop(heap)
        before = worklist.stats.steals
        i = worklist.doitr(t)
        if i == -1:
            continue
        body(t, i)
        done[t].append(i)
        extra = steal_cost if worklist.stats.steals != before else 0.0
        heapq.heappush(heap, (now + extra + cost(t, i), t))
    return done


def check_exactly_once(done: Dict[int, List[int]], n_itrs: int):
    seen = Counter(i for lst in done.values() for i in lst)
    dup = [i for i, c in seen.items() if c > 1]
    missing = set(range(n_itrs)) - set(seen)
    if dup or missing:
        raise InvariantViolation(
            f"iterations not executed exactly once: duplicated {sorted(dup)[:5]}, "
            f"missing {sorted(missing)[:5]}")
