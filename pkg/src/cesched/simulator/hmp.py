"""Utilisation-driven thread migration, the OS baseline for big/LITTLE."""
from __future__ import annotations

from ..machine import CoreType, HmpParams
from .engine import Engine


def make_hmp_hook(params: HmpParams, cost: float):
    """Policy hook run on barrier arrivals and at every window tick.

    LITTLE-hosted threads busier than ``up_threshold`` move to the
    least-utilised big core whose occupant is below ``down_threshold``
    (free cores and blocked threads count as idle).  Big-hosted threads
    below ``down_threshold`` drop to a free LITTLE core.
    """

    def hook(eng: Engine, now: float, reason: str):
        hmp_step(eng, params, cost)

    return hook


def hmp_step(eng: Engine, params: HmpParams, cost: float) -> int:
    nt = len(eng.threads)
    util = [eng.utilization(t, params.window) for t in range(nt)]
    moved = set()
    count = 0
    ups = [t for t in range(nt) if eng.is_running(t)
           and eng.core_type(t) is CoreType.LITTLE and util[t] > params.up_threshold]
    for t in sorted(ups, key=lambda x: (-util[x], x)):
        best = None
        for c, ct in enumerate(eng.cores):
            if ct is not CoreType.BIG:
                continue
            occ = eng.host[c]
            if occ in moved:
                continue
            u = 0.0 if occ is None else util[occ]
            if u < params.down_threshold and (best is None or (u, c) < best):
                best = (u, c)
        if best is None:
            continue
        occ = eng.host[best[1]]
        eng.move(t, best[1], cost)
        moved.add(t)
        if occ is not None:
            moved.add(occ)
        count += 1
    for t in range(nt):
        if t in moved or not eng.is_running(t) or eng.core_type(t) is not CoreType.BIG:
            continue
        if util[t] >= params.down_threshold or eng.now <= 0:
            continue
        for c, ct in enumerate(eng.cores):
            occ = eng.host[c]
            if ct is CoreType.LITTLE and (occ is None or eng.threads[occ].done):
                eng.move(t, c, cost)
                moved.add(t)
                count += 1
                break
    eng.counters["migrations"] += count
    return count
