import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesched.frontend import parse
from cesched.machine import CoreType
from cesched.workload import (OpCounts, count_ops, estimate, estimate_all, thread_workloads,
                              time_on, wl_imbalance)


def body(stmts: str, decls: str = "int i; int c; int x; double s;"):
    prog = parse(f"double a[64];\ndouble b[64];\ndouble y[64];\n"
                 f"void main(void) {{\n{decls}\n{stmts}\n}}\n")
    main = prog.functions[-1]
    n_decl = decls.count(";")
    return prog, main.body.stmts[n_decl:]


def counts(stmts: str, **kw) -> OpCounts:
    prog, ss = body(stmts, **kw)
    return count_ops(list(ss), prog)


def test_array_update():
    c = counts("a[i] = y[i] + 3;")
    assert (c.alu, c.mem, c.branch, c.unknown) == (1, 2, 0, False)


def test_compound_assignment_reads_and_writes():
    c = counts("a[i] += 2;")
    assert (c.alu, c.mem) == (1, 2)


def test_if_takes_the_costlier_path():
    c = counts("if (c) { x = x + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1 + 1; } "
               "else { x = x * 2 * 2 * 2 * 2; }")
    # ten adds on the then-arm plus the implicit compare of a bare condition
    assert (c.alu, c.branch) == (11, 1)


def test_while_is_unknown():
    c = counts("while (x < 10) { x = x + c; }")
    assert c.unknown


def test_constant_trip_loop():
    c = counts("for (i = 0; i < 10; i++) { a[i] = b[i] + 1; }")
    # per trip: 1 alu + 2 mem in the body, compare + increment, one back-edge
    assert (c.alu, c.mem, c.branch) == (30, 20, 10)


def test_triangular_loop_is_counted_exactly():
    c = counts("for (i = 0; i < 4; i++) { for (c = 0; c < i; c++) { x = x + 1; } }")
    inner = 0 + 1 + 2 + 3
    assert c.alu == inner * 3 + 4 * 2
    assert c.branch == inner + 4


def test_symbolic_bound_uses_assumed_trip():
    prog, ss = body("for (i = 0; i < x; i++) { s = s + a[i]; }")
    c = count_ops(list(ss), prog, assumed_trip=50)
    assert c.symbolic_factor == "x"
    assert c.alu == 50 * 3


def test_builtin_and_user_calls():
    prog = parse("double g(double v) { return v * v; }\n"
                 "void main(void) { double s; s = sin(s) + g(s); }\n")
    c = count_ops(list(prog.functions[-1].body.stmts[1:]), prog)
    assert c.alu == 20 + 1 + 1


def test_recursive_call_is_unknown():
    prog = parse("int f(int v) { return f(v - 1); }\nvoid main(void) { int r; r = f(3); }\n")
    assert count_ops(list(prog.functions[-1].body.stmts[1:]), prog).unknown


# -- PEM model ---------------------------------------------------------------------

def pem_oracle(c: OpCounts, p, unknown_cost: float) -> float:
    alu = c.alu + (unknown_cost * max(1, c.unknown_sites) if c.unknown else 0)
    return (alu * p.cycles_per_alu + c.mem * p.cycles_per_mem
            + c.branch * p.branch_miss_rate * p.cycles_per_branch_miss) / p.frequency


count_values = st.integers(0, 10**6)
op_counts = st.builds(OpCounts, alu=count_values, mem=count_values, branch=count_values)


@settings(max_examples=200, deadline=None)
@given(op_counts)
def test_pem_matches_oracle_and_decomposes(machine, c):
    cal = machine.calibration
    for ct in CoreType:
        e = estimate(c, ct, cal)
        assert e.total == pytest.approx(pem_oracle(c, cal.params(ct), cal.unknown_cost), rel=1e-12)
        assert e.total == e.p_op + e.p_mem


def test_pure_compute_ratio_is_two_and_a_half(machine):
    c = OpCounts(alu=1000)
    ratio = time_on(c, CoreType.LITTLE, machine.calibration) / time_on(c, CoreType.BIG,
                                                                        machine.calibration)
    assert ratio == pytest.approx(2.5, rel=1e-12)


def test_zero_counts_cost_nothing(machine):
    w = estimate_all(OpCounts(), machine.calibration)
    assert w.total(CoreType.BIG) == 0 == w.total(CoreType.LITTLE)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_memory_favours_little_more_than_compute(machine, alu, mem):
    cal = machine.calibration
    b = estimate(OpCounts(alu=alu, mem=mem), CoreType.BIG, cal)
    l = estimate(OpCounts(alu=alu, mem=mem), CoreType.LITTLE, cal)
    assert b.p_op < l.p_op
    assert b.p_mem / l.p_mem > b.p_op / l.p_op


def test_unknown_is_expensive(machine):
    cal = machine.calibration
    assert time_on(OpCounts(unknown=True, unknown_sites=2), CoreType.BIG, cal) == \
        pytest.approx(2 * cal.unknown_cost * cal.big.cycles_per_alu / cal.big.frequency)


def test_toy_static_split_workloads(toy_machine):
    cores = [CoreType.BIG, CoreType.BIG, CoreType.LITTLE, CoreType.LITTLE]
    it = OpCounts(alu=1)
    tw = thread_workloads([it.scale(25)] * 4, cores, toy_machine.calibration)
    assert tw.wl == pytest.approx((10, 10, 25, 25))
    assert tw.imbalance.value == pytest.approx(15)
    tw = thread_workloads([it.scale(k) for k in (36, 36, 14, 14)], cores,
                          toy_machine.calibration)
    assert tw.imbalance.value == pytest.approx(0.4)


def test_unmapped_thread_rejected(machine):
    with pytest.raises(ValueError):
        thread_workloads([OpCounts()] * 3, [CoreType.BIG, None, CoreType.BIG],
                         machine.calibration)


# -- properties over generated straight-line code -------------------------------------

stmt_pool = ["a[i] = b[i] + 1;", "x = x * 3;", "s = s + y[i] * b[i];", "a[i] += 2;",
             "if (x < 3) { a[0] = 1; } else { x = x + 2 + 2; }", "s = sin(s);"]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(stmt_pool), min_size=1, max_size=8))
def test_block_counts_are_additive_and_monotone(stmts):
    whole = counts(" ".join(stmts))
    parts = [counts(s) for s in stmts]
    assert whole.alu == sum(p.alu for p in parts)
    assert whole.mem == sum(p.mem for p in parts)
    assert whole.branch == sum(p.branch for p in parts)
    shorter = counts(" ".join(stmts[:-1])) if len(stmts) > 1 else OpCounts()
    assert (shorter.alu, shorter.mem, shorter.branch) <= (whole.alu, whole.mem, whole.branch)
    assert shorter.alu <= whole.alu and shorter.mem <= whole.mem


@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=8))
def test_wl_imbalance_is_range(ws):
    v = wl_imbalance(ws)
    assert v == max(ws) - min(ws) >= 0
    assert wl_imbalance(list(reversed(ws))) == v
