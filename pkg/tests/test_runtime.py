import random
import threading
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesched.errors import InvariantViolation
from cesched.runtime import (ALLOWED_TRANSITIONS, Status, Worklist, check_exactly_once,
                             lock_update, run_parallel_for)
from cesched.scheduler import IterationDivision


def with_remainders(rem, chunk):
    w = Worklist(len(rem), rem, chunk)
    return w


def test_initialize_from_division():
    w = Worklist.initialize(IterationDivision((0.36, 0.72, 0.86, 1.0)), 100, 4)
    assert list(zip(w.itr, w.end)) == [(0, 36), (36, 72), (72, 86), (86, 100)]
    assert all(s is Status.INITIAL_PRIVATE for s in w.status)
    w0 = Worklist.initialize(IterationDivision((0.5, 1.0)), 0, 2)
    assert w0.remaining(0) == w0.remaining(1) == 0


def test_lock_update_returns_old_value():
    vals, lock = [10], threading.Lock()
    assert lock_update(vals, 0, 7, lock) == 10 and vals == [7]
    assert lock_update(vals, 0, 7, lock) == 7 and vals == [7]


def test_getthread_picks_max_remainder():
    w = with_remainders([0, 40, 5, 0], 10)
    assert w.getthread() == 1 and w.status[1] is Status.SHARED


@pytest.mark.parametrize("rem", [[0, 8, 5, 0], [0, 0, 0, 0]])
def test_getthread_sentinel(rem):
    w = with_remainders(rem, 10)
    assert w.getthread() == 4


def test_private_advance():
    w = Worklist(1, [10])
    w.itr[0] = 3
    w.status[0] = Status.PRIVATE
    assert w.doitr(0) == 3 and w.itr[0] == 4


def test_steal_arithmetic():
    w = Worklist(2, [0, 60], chunk=10)
    w.itr[1] = 20
    assert w.doitr(0) == 50
    assert (w.itr[0], w.end[0]) == (51, 60)
    assert w.end[1] == 50


def test_exhausted_without_victim():
    w = Worklist(2, [0, 3], chunk=10)
    assert w.doitr(0) == -1


def test_no_stealing_in_fixed_size_mode():
    w = Worklist(2, [60, 40], stealing=False)
    slow = {0: 0.0002, 1: 0.0}
    done = run_parallel_for(w, lambda t, i: time.sleep(slow[t]) if i % 10 == 0 else None)
    check_exactly_once(done, 100)
    assert w.stats.attempts == 0


def test_lopsided_division_steals_under_threads():
    w = Worklist(4, [100, 0, 0, 0], chunk=5)
    done = run_parallel_for(w, lambda t, i: time.sleep(0.0005))
    check_exactly_once(done, 100)
    assert w.stats.steals >= 1
    assert w.stats.steals <= w.stats.attempts


def test_check_exactly_once_detects_duplicates():
    with pytest.raises(InvariantViolation):
        check_exactly_once({0: [0, 1], 1: [1]}, 2)
    with pytest.raises(InvariantViolation):
        check_exactly_once({0: [0]}, 2)


def test_simulated_executor_is_deterministic():
    def run():
        w = Worklist(3, [50, 30, 20], chunk=2, record=True)
        done = run_parallel_for(w, lambda t, i: None, executor="simulated",
                                cost=lambda t, i: 1.0 + (t == 0) * 2.0, steal_cost=0.5)
        return done, w.transitions, w.stats.to_dict()

    assert run() == run()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3000), st.integers(1, 8), st.sampled_from([1, 2, 10]),
       st.integers(0, 2**32 - 1))
def test_exactly_once_simulated(n_itrs, nt, chunk, seed):
    rng = random.Random(seed)
    cuts = sorted(rng.randrange(n_itrs + 1) for _ in range(nt - 1))
    counts = [b - a for a, b in zip([0] + cuts, cuts + [n_itrs])]
    w = Worklist(nt, counts, chunk, record=True)
    speed = [rng.uniform(0.2, 3.0) for _ in range(nt)]
    done = run_parallel_for(w, lambda t, i: None, "simulated", cost=lambda t, i: speed[t])
    check_exactly_once(done, n_itrs)
    assert all(w.itr[t] >= w.end[t] for t in range(nt))
    assert w.stats.stolen_iterations <= n_itrs
    for _, old, new in w.transitions:
        assert (old, new) in ALLOWED_TRANSITIONS


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 4000), st.integers(1, 8), st.sampled_from([1, 2, 10]),
       st.integers(0, 2**32 - 1))
def test_exactly_once_real_threads(n_itrs, nt, chunk, seed):
    rng = random.Random(seed)
    counts = [0] * nt
    for _ in range(n_itrs):
        counts[min(nt - 1, int(rng.random() ** 2 * nt))] += 1
    w = Worklist(nt, counts, chunk)
    slow = rng.randrange(nt)

    def body(t, i):
        if t == slow and i % 50 == 0:
            time.sleep(0.0001)

    done = run_parallel_for(w, body)
    check_exactly_once(done, n_itrs)
    assert sum(w.executed) == n_itrs
