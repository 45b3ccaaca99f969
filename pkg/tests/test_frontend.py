import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesched.errors import LexError, ParseError, ValidationError
from cesched.frontend import SegmentKind, emit_text, nodes as n, parse, parallel_regions, \
    partition_segments


def test_corpus_round_trip(corpus):
    for name, src in corpus.items():
        prog = parse(src, name)
        text = emit_text(prog)
        assert parse(text, name) == prog, name
        # a second pass is byte-stable
        assert emit_text(parse(text, name)) == text, name


@pytest.mark.parametrize("src,exc,where", [
    ("int x = ;", ParseError, (1, 9)),
    ("int x = 1 @ 2;", LexError, (1, 11)),
    ("void main(void) { int i; #pragma omp for\n for (i=0;i<3;i++) { } }", ValidationError, None),
])
def test_diagnostics_carry_positions(src, exc, where):
    with pytest.raises(exc) as info:
        parse(src)
    d = info.value.diagnostics[0]
    if where:
        assert (d.line, d.col) == where


def test_non_canonical_loop_rejected():
    src = ("void main(void) {\n int i;\n #pragma omp parallel\n {\n #pragma omp for\n"
           " for (i = 1; i < 10; i *= 2) { }\n }\n}\n")
    with pytest.raises(ValidationError, match="non-canonical"):
        parse(src)


def test_segments_partition(corpus):
    prog = parse(corpus["sec_like"])
    (region,) = parallel_regions(prog)
    kinds = [s.kind for s in partition_segments(region)]
    assert kinds == [SegmentKind.BLOCK, SegmentKind.SECTIONS]


def test_array_initializer_round_trip():
    src = "double t[3] = {0.5, 1.0, 2.0};\n"
    prog = parse(src)
    assert isinstance(prog.globals[0].init, n.ArrayInit)
    assert emit_text(prog) == src


# -- generated expressions ---------------------------------------------------------

names = st.sampled_from(["x", "y", "z"])
leaves = st.one_of(names.map(lambda v: v), st.integers(0, 999).map(str))


def _bin(children):
    ops = st.sampled_from(["+", "-", "*", "/", "%", "<", "<=", "==", "!=", "&&", "||"])
    return st.tuples(children, ops, children).map(lambda t: f"({t[0]} {t[1]} {t[2]})") | \
        children.map(lambda c: f"-({c})") | children.map(lambda c: f"!{c}")


exprs = st.recursive(leaves, _bin, max_leaves=12)


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_expression_round_trip(e):
    src = f"int x;\nint y;\nint z;\n\nvoid main(void) {{\n    x = {e};\n}}\n"
    prog = parse(src)
    again = parse(emit_text(prog))
    assert again == prog
