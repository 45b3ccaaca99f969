import os
import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesched.errors import ValidationError
from cesched.frontend import emit_text, nodes as n, parse
from cesched.machine import default_machine
from cesched.scheduler import analyze
from cesched.simulator import simulate
from cesched.transform import is_transformed, transform_program

from conftest import loop_program

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def transformed_text(src: str, machine=None, n_threads=None) -> str:
    machine = machine or default_machine()
    prog = parse(src)
    return emit_text(transform_program(prog, analyze(prog, machine, n_threads)))


def golden(name: str) -> str:
    with open(os.path.join(GOLDEN, name), encoding="utf-8") as fh:
        return fh.read()


@pytest.mark.parametrize("kernel", ["step_like", "mig_like"])
def test_golden_output(corpus, kernel):
    assert transformed_text(corpus[kernel]) == golden(f"{kernel}.ces.c")


def region_body(text: str):
    prog = parse(text)
    regions = [x for x in n.walk(prog) if isinstance(x, n.ParallelRegion)]
    assert len(regions) == 1
    return regions[0].body.stmts


def test_worklist_lowering_structure(corpus):
    stmts = region_body(transformed_text(corpus["step_like"]))
    shape = []
    for s in stmts:
        if isinstance(s, n.Barrier):
            shape.append("barrier")
        elif isinstance(s, n.WhileLoop):
            shape.append("doitr-loop")
        elif isinstance(s, n.ExprStmt) and isinstance(s.expr, n.Call):
            shape.append(s.expr.func)
        else:
            shape.append(type(s).__name__)
    assert shape == ["VarDecl", "initialize", "barrier", "doitr-loop", "barrier",
                     "update_scaledend"]
    loop = stmts[3]
    # the guard keeps the body from running with index -1
    assert emit_text_expr(loop.cond) == "(i = doitr(ces_tid)) != -1"


def emit_text_expr(e):
    from cesched.frontend import emit_expr
    return emit_expr(e)


def test_worklist_lowering_is_byte_stable(corpus):
    a = transformed_text(corpus["step_like"])
    assert a == transformed_text(corpus["step_like"])
    assert emit_text(parse(a)) == a


def test_fixed_size_loop_drops_stealing():
    text = transformed_text(loop_program(1000, "a[i] = b[i] + 1;"))
    assert "doitr_private" in text
    assert "getthread" not in text and "lock_acquire" not in text


def test_single_entry_loop_has_no_update():
    text = transformed_text(loop_program(1000, "for (j = 0; j < 300; j++) { a[i] = a[i] + sin(b[j]); }"))
    assert "update_scaledend" not in text
    assert text.count("double scaledend_1[") == 1


def test_no_parallel_region_is_unchanged():
    src = "int x;\n\nvoid main(void) {\n    x = 1;\n}\n"
    assert transformed_text(src) == src


def test_already_transformed_rejected(corpus):
    text = transformed_text(corpus["step_like"])
    prog = parse(text)
    assert is_transformed(prog)
    with pytest.raises(ValidationError, match="reserved identifiers present"):
        transform_program(prog, analyze(prog, default_machine()))


def test_user_code_using_reserved_prefix_rejected():
    src = loop_program(10, "a[i] = 1.0;").replace("int j;", "int ces_j;")
    prog = parse(src)
    with pytest.raises(ValidationError, match="reserved identifiers present"):
        transform_program(prog, analyze(prog, default_machine()))


def sections_program(works, single=False) -> str:
    if single:
        inner = f"#pragma omp single\n{{\n{works[0]}\n}}"
    else:
        secs = "\n".join(f"#pragma omp section\n{{\n{w}\n}}" for w in works)
        inner = f"#pragma omp sections\n{{\n{secs}\n}}"
    return ("double out[64];\n\nvoid main(void) {\n#pragma omp parallel\n{\nint k;\n"
            f"{inner}\n}}\n}}\n")


def section_work(idx: int, trips: int, memory: bool) -> str:
    if memory:
        return (f"for (k = 0; k < {trips}; k++) {{ out[(k + {idx}) % 64] = "
                f"out[k % 64] + out[(k + 1) % 64]; }}")
    return f"for (k = 0; k < {trips}; k++) {{ out[{idx}] = out[{idx}] + k * k % 7; }}"


def omp_for_bound(text: str) -> int:
    m = re.search(r"for \(int ces_k = 0; ces_k < (\d+); ces_k\+\+\)", text)
    return int(m.group(1))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 10), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_sections_iteration_count(n_sec, nt, seed):
    rng = random.Random(seed)
    works = [section_work(i, rng.randrange(1, 4000), rng.random() < 0.5) for i in range(n_sec)]
    prog = parse(sections_program(works))
    m = default_machine()
    plan = analyze(prog, m, nt)
    (sa,) = [s.sections for s in plan.segments if s.sections is not None]
    text = emit_text(transform_program(prog, plan))
    assert omp_for_bound(text) == sa.max_per_thread * nt


def test_padding_with_empty_iterations():
    works = [section_work(i, 100, False) for i in range(5)]
    prog = parse(sections_program(works))
    plan = analyze(prog, default_machine(), 4)
    (sa,) = [s.sections for s in plan.segments if s.sections is not None]
    text = emit_text(transform_program(prog, plan))
    assert omp_for_bound(text) == sa.max_per_thread * 4
    assert text.count("case ") == 5


def test_single_becomes_one_slot_per_thread():
    prog = parse(sections_program([section_work(0, 100, False)], single=True))
    text = emit_text(transform_program(prog, analyze(prog, default_machine(), 4)))
    assert omp_for_bound(text) == 4 and text.count("case ") == 1


def test_migration_sites(corpus):
    text = transformed_text(corpus["mig_like"])
    assert text.count("migrate(ces_tid, ces_i,") == 1
    assert text.count("mg[ces_tid] = 1;") == 1
    assert text.index("migrate(") < text.index("mg[ces_tid] = 1;")


def test_two_pairs_on_two_big_four_little(corpus):
    m = default_machine().with_counts(2, 4)
    text = transformed_text(corpus["mig_like"], m)
    assert "mg[ces_i] >= 1" in text and "mg[ces_i] >= 2" in text
    assert "mg[ces_tid] = 1;" in text and "mg[ces_tid] = 2;" in text


def test_transformed_file_simulates_like_ces_policy(corpus):
    m = default_machine()
    for name in ("ep_like", "sec_like", "is_like"):
        prog = parse(corpus[name])
        direct = simulate(parse(transformed_text(corpus[name], m)), m, "ces", trace=False)
        via_policy = simulate(prog, m, "ces", trace=False)
        assert direct.iterations == via_policy.iterations
        assert direct.makespan == via_policy.makespan
