"""Pretty-printer: AST back to mini-OpenMP source text."""
from __future__ import annotations

from typing import List

from . import nodes as n
from .lexer import SourceProgram
from .parser import BINARY_PREC

INDENT = "    "
_UNARY_PREC = 11
_PRIMARY_PREC = 12


def _prec(e) -> int:
    if isinstance(e, n.Binary):
        return BINARY_PREC[e.op]
    if isinstance(e, n.Unary):
        return _UNARY_PREC
    if isinstance(e, n.AssignExpr):
        return 0
    return _PRIMARY_PREC


def _float_text(v: float) -> str:
    s = repr(float(v))
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def emit_expr(e, min_prec: int = 0) -> str:
    if isinstance(e, n.IntLit):
        s = str(e.value)
    elif isinstance(e, n.FloatLit):
        s = _float_text(e.value)
    elif isinstance(e, n.Name):
        s = e.id
    elif isinstance(e, n.Index):
        s = f"{e.array}[{emit_expr(e.index)}]"
    elif isinstance(e, n.Call):
        s = f"{e.func}({', '.join(emit_expr(a) for a in e.args)})"
    elif isinstance(e, n.Unary):
        inner = emit_expr(e.operand, _UNARY_PREC)
        if isinstance(e.operand, n.Unary):
            inner = f"({inner})"
        s = f"{e.op}{inner}"
    elif isinstance(e, n.Binary):
        p = BINARY_PREC[e.op]
        s = f"{emit_expr(e.left, p)} {e.op} {emit_expr(e.right, p + 1)}"
    elif isinstance(e, n.AssignExpr):
        s = f"{emit_expr(e.target)} = {emit_expr(e.value, 0)}"
    elif isinstance(e, n.ArrayInit):
        s = "{" + ", ".join(emit_expr(v) for v in e.values) + "}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    if _prec(e) < min_prec:
        s = f"({s})"
    return s


class Emitter:
    def __init__(self):
        self.lines: List[str] = []
        self.depth = 0

    def line(self, text: str):
        self.lines.append(INDENT * self.depth + text)

    def body(self, block: n.Block):
        self.depth += 1
        for s in block.stmts:
            self.stmt(s)
        self.depth -= 1

    def braced(self, head: str, block: n.Block, tail: str = "}"):
        self.line(head + " {" if head else "{")
        self.body(block)
        self.line(tail)

    def program(self, prog: n.Program) -> str:
        for k, item in enumerate(prog.items):
            if isinstance(item, n.FunctionDef):
                if k:
                    self.lines.append("")
                params = ", ".join(
                    f"{p.type} {p.name}[]" if p.is_array else f"{p.type} {p.name}"
                    for p in item.params) or "void"
                self.braced(f"{item.ret_type} {item.name}({params})", item.body)
            else:
                if k and isinstance(prog.items[k - 1], n.FunctionDef):
                    self.lines.append("")
                self.stmt(item)
        return "\n".join(self.lines) + "\n" if self.lines else ""

    def stmt(self, s):
        if isinstance(s, n.Block):
            self.braced("", s)
        elif isinstance(s, n.VarDecl):
            text = f"{s.type} {s.name}"
            if s.size is not None:
                text += f"[{emit_expr(s.size)}]"
            if s.init is not None:
                text += f" = {emit_expr(s.init)}"
            self.line(text + ";")
        elif isinstance(s, n.Assign):
            self.line(self.assign_text(s) + ";")
        elif isinstance(s, n.ExprStmt):
            self.line(emit_expr(s.expr, 1) + ";")
        elif isinstance(s, n.If):
            self.if_chain(s, "if")
        elif isinstance(s, n.ForLoop):
            self.braced(self.for_head(s), s.body)
        elif isinstance(s, n.WhileLoop):
            self.braced(f"while ({emit_expr(s.cond)})", s.body)
        elif isinstance(s, n.DoWhileLoop):
            self.braced("do", s.body, f"}} while ({emit_expr(s.cond)});")
        elif isinstance(s, n.Switch):
            self.line(f"switch ({emit_expr(s.subject)}) {{")
            self.depth += 1
            for c in s.cases:
                self.line(f"case {c.value}:")
                self.body(c.body)
            if s.default is not None:
                self.line("default:")
                self.body(s.default)
            self.depth -= 1
            self.line("}")
        elif isinstance(s, n.Break):
            self.line("break;")
        elif isinstance(s, n.Continue):
            self.line("continue;")
        elif isinstance(s, n.Return):
            self.line("return;" if s.value is None else f"return {emit_expr(s.value)};")
        elif isinstance(s, n.Barrier):
            self.line("#pragma omp barrier")
        elif isinstance(s, n.ParallelRegion):
            head = "#pragma omp parallel"
            if s.num_threads is not None:
                head += f" num_threads({emit_expr(s.num_threads)})"
            self.line(head)
            self.braced("", s.body)
        elif isinstance(s, n.OmpFor):
            head = "#pragma omp for"
            if s.schedule is not None:
                chunk = "" if s.chunk is None else f", {emit_expr(s.chunk)}"
                head += f" schedule({s.schedule}{chunk})"
            if s.nowait:
                head += " nowait"
            self.line(head)
            self.braced(self.for_head(s.loop), s.loop.body)
        elif isinstance(s, n.OmpSections):
            self.line("#pragma omp sections" + (" nowait" if s.nowait else ""))
            self.line("{")
            self.depth += 1
            for sec in s.sections:
                self.line("#pragma omp section")
                self.braced("", sec)
            self.depth -= 1
            self.line("}")
        elif isinstance(s, n.OmpSingle):
            self.line("#pragma omp single" + (" nowait" if s.nowait else ""))
            self.braced("", s.body)
        elif isinstance(s, n.AtomicWrite):
            self.line("#pragma omp atomic write")
            self.line(self.assign_text(s.assign) + ";")
        else:
            raise TypeError(f"not a statement: {s!r}")

    @staticmethod
    def assign_text(s: n.Assign) -> str:
        target = emit_expr(s.target)
        if s.op in ("+=", "-=") and s.value == n.IntLit(1):
            return target + ("++" if s.op == "+=" else "--")
        return f"{target} {s.op} {emit_expr(s.value)}"

    @staticmethod
    def for_head(loop: n.ForLoop) -> str:
        decl = f"{loop.decl_type} " if loop.decl_type else ""
        step = f"{loop.var}++" if loop.step == n.IntLit(1) else f"{loop.var} += {emit_expr(loop.step)}"
        return (f"for ({decl}{loop.var} = {emit_expr(loop.init)}; "
                f"{loop.var} {loop.cmp} {emit_expr(loop.bound)}; {step})")

    def if_chain(self, s: n.If, keyword: str):
        self.line(f"{keyword} ({emit_expr(s.cond)}) {{")
        self.body(s.then)
        orelse = s.orelse
        if orelse is None:
            self.line("}")
        elif len(orelse.stmts) == 1 and isinstance(orelse.stmts[0], n.If):
            self.else_if(orelse.stmts[0])
        else:
            self.line("} else {")
            self.body(orelse)
            self.line("}")

    def else_if(self, s: n.If):
        self.line(f"}} else if ({emit_expr(s.cond)}) {{")
        self.body(s.then)
        orelse = s.orelse
        if orelse is None:
            self.line("}")
        elif len(orelse.stmts) == 1 and isinstance(orelse.stmts[0], n.If):
            self.else_if(orelse.stmts[0])
        else:
            self.line("} else {")
            self.body(orelse)
            self.line("}")


def emit_source(program: n.Program, path: str = "<emitted>") -> SourceProgram:
    """Pretty-print ``program``; output re-parses to an equal AST."""
    return SourceProgram(Emitter().program(program), path)


def emit_text(program: n.Program) -> str:
    return Emitter().program(program)
