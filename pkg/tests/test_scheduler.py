import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesched.frontend import parse
from cesched.machine import CoreType
from cesched.scheduler import (IterationDivision, analyze, classify_fixed_size, compute_chunk,
                               divide_iterations, exchange_cost, live_counts,
                               place_migration_points, schedule_sections, update_scaledend)
from cesched.workload import OpCounts, time_on, wl_imbalance

B, L = CoreType.BIG, CoreType.LITTLE


def compositions(n, k):
    for cuts in itertools.combinations(range(n + k - 1), k - 1):
        prev, out = -1, []
        for c in cuts + (n + k - 1,):
            out.append(c - prev - 1)
            prev = c
        yield out


def brute_min_im(n, times):
    return min(wl_imbalance([c * t for c, t in zip(comp, times)])
               for comp in compositions(n, len(times)))


# -- omp for division ---------------------------------------------------------------

def test_toy_division(toy_machine):
    d = divide_iterations(100, [B, B, L, L], OpCounts(alu=1), toy_machine.calibration)
    assert d.counts == [36, 36, 14, 14]
    assert d.scaledend == pytest.approx((0.36, 0.72, 0.86, 1.0))


def test_symmetric_cores_split_evenly(machine):
    d = divide_iterations(100, [B] * 4, OpCounts(alu=7, mem=2), machine.calibration)
    assert d.counts == [25, 25, 25, 25]


def test_zero_iterations(machine):
    d = divide_iterations(0, [B, L, L], OpCounts(alu=1), machine.calibration)
    assert d.counts == [0, 0, 0]


def test_symbolic_division_keeps_fractions(machine):
    d = divide_iterations(None, [B, L], OpCounts(alu=1), machine.calibration, "n")
    assert d.scaledend == pytest.approx((2.5 / 3.5, 1.0))
    assert sum(d.counts_for(1000)) == 1000


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 24), st.lists(st.sampled_from([B, L]), min_size=1, max_size=4),
       st.integers(1, 50), st.integers(0, 50))
def test_division_matches_brute_force(machine, n_itrs, cores, alu, mem):
    cal = machine.calibration
    it = OpCounts(alu=alu, mem=mem)
    d = divide_iterations(n_itrs, cores, it, cal)
    times = [time_on(it, ct, cal) for ct in cores]
    got = wl_imbalance([c * t for c, t in zip(d.counts, times)])
    assert sum(d.counts) == n_itrs and min(d.counts) >= 0
    assert got == pytest.approx(brute_min_im(n_itrs, times), rel=1e-9, abs=1e-18)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5000), st.lists(st.sampled_from([B, L]), min_size=1, max_size=8))
def test_division_conserves_iterations(machine, n_itrs, cores):
    d = divide_iterations(n_itrs, cores, OpCounts(alu=3, mem=1), machine.calibration)
    assert sum(d.counts) == n_itrs
    assert list(d.scaledend) == sorted(d.scaledend)
    assert d.scaledend[-1] == 1.0


def test_permuting_identical_cores_permutes_division(machine):
    it = OpCounts(alu=5, mem=1)
    a = divide_iterations(103, [B, L, B, L], it, machine.calibration).counts
    b = divide_iterations(103, [L, B, L, B], it, machine.calibration).counts
    assert sorted(a[0::2]) == sorted(b[1::2]) and sorted(a[1::2]) == sorted(b[0::2])


def test_counts_recovered_from_scaledend():
    d = IterationDivision((0.36, 0.72, 0.86, 1.0), 100)
    assert d.ranges_for(100) == [(0, 36), (36, 72), (72, 86), (86, 100)]
    assert d.counts_for(0) == [0, 0, 0, 0]
    assert IterationDivision((1.0,)).ranges_for(7) == [(0, 7)]


def test_invalid_scaledend_rejected():
    with pytest.raises(ValueError):
        IterationDivision((0.6, 0.4, 1.0))
    with pytest.raises(ValueError):
        IterationDivision((0.5, 0.9))


@pytest.mark.parametrize("executed,expected", [
    ([36, 36, 14, 14], (0.36, 0.72, 0.86, 1.0)),
    ([25, 25, 25, 25], (0.25, 0.5, 0.75, 1.0)),
    ([100, 0, 0, 0], (1.0, 1.0, 1.0, 1.0)),
])
def test_update_scaledend(executed, expected):
    assert update_scaledend(executed, 100).scaledend == pytest.approx(expected)


def test_update_scaledend_sum_mismatch():
    with pytest.raises(ValueError):
        update_scaledend([10, 10], 30)


# -- fixed-size and chunk ---------------------------------------------------------

def test_tiny_body_is_fixed_size(machine):
    assert classify_fixed_size(OpCounts(alu=1, mem=1), machine.calibration)


def test_heavy_body_steals(machine):
    assert not classify_fixed_size(OpCounts(alu=500), machine.calibration)


def test_unknown_body_steals(machine):
    assert not classify_fixed_size(OpCounts(alu=1, unknown=True, unknown_sites=1),
                                   machine.calibration)


def test_chunk_formula(toy_machine):
    from dataclasses import replace
    cal = replace(toy_machine.calibration, steal_cost=10 / 2.5)  # ten big iterations
    assert compute_chunk(OpCounts(alu=1), cal) == 10
    assert compute_chunk(OpCounts(alu=100), cal) == 1
    assert compute_chunk(OpCounts(alu=1), cal, n_itrs=80, n_threads=8) <= 5


# -- sections ----------------------------------------------------------------

PRIME = OpCounts(alu=13_000_000, mem=1, branch=1_000_000)
TABLE = OpCounts(alu=4_000_000, mem=1_600_000, branch=400_000)


def test_prime_like_sections_prefer_big(machine):
    cores = list(machine.cores)
    sa = schedule_sections([PRIME] * 4 + [TABLE] * 4, cores, machine.calibration)
    assert all(cores[sa.thread_of[s]] is B for s in range(4))
    assert sa.big_affine == (True,) * 4 + (False,) * 4


def test_identical_sections_on_identical_cores(machine):
    sa = schedule_sections([TABLE, TABLE], [B, B], machine.calibration)
    assert sorted(sa.thread_of) == [0, 1] and sa.wl_im == 0


def test_single_section_goes_to_preferred_type(machine):
    sa = schedule_sections([PRIME], [L, B, L, B], machine.calibration)
    assert sa.thread_of == (1,)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10**6), st.integers(0, 10**6)), min_size=1, max_size=12),
       st.lists(st.sampled_from([B, L]), min_size=1, max_size=8))
def test_normalization_is_monotone(machine, secs, cores):
    sa = schedule_sections([OpCounts(alu=a, mem=m) for a, m in secs], cores, machine.calibration)
    assert len(sa.thread_of) == len(secs)
    assert all(0 <= t < len(cores) for t in sa.thread_of)
    assert all(b < a for a, b in zip(sa.history, sa.history[1:]))
    assert sa.wl_im == pytest.approx(sa.history[-1])


# -- migration ---------------------------------------------------------------

def test_live_counts_by_backward_liveness():
    prog = parse("void main(void) { int a; int b; int c; a = 1; b = a + 2; c = b * a; "
                 "a = c; }\n")
    stmts = prog.functions[0].body.stmts[3:]
    # after each statement: {a} {a,b} {c} {}
    assert live_counts(stmts) == [0, 1, 2, 1, 0]


def test_exchange_cost_formula(machine):
    cal = machine.calibration
    assert exchange_cost(7, cal) == pytest.approx(cal.migration_base_cost + 7 * cal.live_var_cost)


def _uniform_block(k, cores):
    step = OpCounts(alu=2_000_000)
    return [[step] * k for _ in cores]


def test_mp_at_cheapest_boundary(machine):
    cores = [B, B, L, L]
    plan = place_migration_points([None] * 4, cores, machine.calibration,
                                  per_thread=_uniform_block(4, cores), live=[0, 5, 2, 7, 0])
    (pair,) = plan.pairs
    assert pair.mp == 2 and pair.live_vars == 2
    assert pair.est_reduction > pair.c_ex


def test_balanced_block_has_no_plan(machine):
    cores = [B, B, L, L]
    cal = machine.calibration
    # per-thread work scaled so every thread needs the same time on its own core
    big, little = OpCounts(alu=2_500_000), OpCounts(alu=1_000_000)
    per = [[big] * 4, [big] * 4, [little] * 4, [little] * 4]
    plan = place_migration_points([None] * 4, cores, cal, per_thread=per, live=[0] * 5)
    assert plan.empty


def test_two_pairs_for_twice_as_many_little_cores(machine):
    cores = [B, B, L, L, L, L]
    plan = place_migration_points([None] * 12, cores, machine.calibration,
                                  per_thread=_uniform_block(12, cores), live=[0] * 13)
    assert len(plan.pairs) == 2
    assert plan.pairs[0].mp < plan.pairs[1].mp


def test_guard_rejects_unprofitable_exchange(machine):
    from dataclasses import replace
    cores = [B, B, L, L]
    cal = replace(machine.calibration, migration_base_cost=1.0)
    plan = place_migration_points([None] * 4, cores, cal,
                                  per_thread=_uniform_block(4, cores), live=[0] * 5)
    assert plan.empty and plan.rejected is not None
    assert plan.rejected.est_reduction <= plan.rejected.c_ex


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(1, 3), st.integers(1, 4), st.integers(0, 10**6),
       st.floats(1e-7, 1e-2))
def test_pairs_only_when_reduction_beats_cost(machine, k, nb, nl, seed, base):
    from dataclasses import replace
    rng = random.Random(seed)
    cores = [B] * nb + [L] * nl
    cal = replace(machine.calibration, migration_base_cost=base)
    per = [[OpCounts(alu=rng.randrange(1, 3_000_000)) for _ in range(k)] for _ in cores]
    live = [rng.randrange(0, 8) for _ in range(k + 1)]
    plan = place_migration_points([None] * k, cores, cal, per_thread=per, live=live)
    assert len(plan.pairs) <= max(1, nl // nb)
    for p in plan.pairs:
        assert p.est_reduction > p.c_ex
        assert p.c_ex == pytest.approx(exchange_cost(live[p.mp], cal))
        assert 1 <= p.mp < k and p.mgp >= 1
    assert [p.mp for p in plan.pairs] == sorted(p.mp for p in plan.pairs)


# -- whole-program analysis ----------------------------------------------------------

def test_is_like_is_fixed_size(machine, corpus):
    (lp,) = analyze(parse(corpus["is_like"]), machine).loop_plans()
    assert lp.fixed_size and not lp.stealing


def test_ep_like_has_one_stealable_loop(machine, corpus):
    (lp,) = analyze(parse(corpus["ep_like"]), machine).loop_plans()
    assert lp.stealing and lp.division.n_itrs == 16384


def test_reentrant_loop_detected(machine, corpus):
    (lp,) = analyze(parse(corpus["step_like"]), machine).loop_plans()
    assert lp.reentrant


def test_empty_program_has_empty_plan(machine):
    plan = analyze(parse("void main(void) { int x; x = 1; }\n"), machine)
    assert plan.segments == [] and plan.to_dict()["segments"] == []
