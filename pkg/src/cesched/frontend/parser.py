"""Recursive-descent parser for the mini-OpenMP dialect."""
from __future__ import annotations

from typing import List, Optional, Tuple

from ..errors import ParseError, ValidationError
from . import nodes as n
from .lexer import SourceProgram, Token, tokenize

TYPES = ("int", "float", "double", "void")

# binary precedence, higher binds tighter
BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}
UNARY_OPS = ("-", "!", "~")
ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^=")
CLAUSES = ("schedule", "nowait", "num_threads", "write")
SCHEDULE_KINDS = ("static", "dynamic", "guided")


class Parser:
    def __init__(self, src: SourceProgram):
        self.src = src
        self.toks: List[Token] = tokenize(src)
        self.i = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def pos(self, tok: Optional[Token] = None) -> Tuple[int, int]:
        return self.src.position((tok or self.tok).offset)

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        return ParseError([self.src.diag((tok or self.tok).offset, message)])

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "keyword") and t.text == text

    def at_ident(self, text: Optional[str] = None) -> bool:
        return self.tok.kind == "ident" and (text is None or self.tok.text == text)

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected '{text}' but found '{found}'")
        t = self.tok
        self.i += 1
        return t

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what} but found '{found}'")
        t = self.tok
        self.i += 1
        return t

    # -- top level -----------------------------------------------------------

    def parse_program(self) -> n.Program:
        items = []
        start = self.pos()
        while self.tok.kind != "eof":
            items.append(self.parse_top_item())
        return n.Program(tuple(items), pos=start)

    def parse_top_item(self):
        if not (self.tok.kind == "keyword" and self.tok.text in TYPES):
            raise self.error(f"expected declaration or function definition, found '{self.tok.text}'")
        type_tok = self.tok
        self.i += 1
        name = self.expect_ident()
        if self.at("("):
            return self.parse_function(type_tok, name)
        if type_tok.text == "void":
            raise self.error("variable declared void", name)
        return self.finish_decl(type_tok, name)

    def parse_function(self, type_tok: Token, name: Token) -> n.FunctionDef:
        self.expect("(")
        params = []
        if self.at("void") and self.peek().text == ")":
            self.i += 1
        elif not self.at(")"):
            while True:
                params.append(self.parse_param())
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_block()
        return n.FunctionDef(type_tok.text, name.text, tuple(params), body, pos=self.pos(type_tok))

    def parse_param(self) -> n.Param:
        if not (self.tok.kind == "keyword" and self.tok.text in TYPES and self.tok.text != "void"):
            raise self.error("expected parameter type")
        t = self.tok
        self.i += 1
        name = self.expect_ident("parameter name")
        is_array = False
        if self.accept("["):
            if not self.at("]"):
                self.parse_expr()
            self.expect("]")
            is_array = True
        return n.Param(t.text, name.text, is_array, pos=self.pos(t))

    def finish_decl(self, type_tok: Token, name: Token) -> n.VarDecl:
        size = init = None
        if self.accept("["):
            size = self.parse_expr()
            self.expect("]")
        if self.accept("="):
            if size is not None:
                start = self.expect("{")
                values = [self.parse_expr()]
                while self.accept(","):
                    values.append(self.parse_expr())
                self.expect("}")
                init = n.ArrayInit(tuple(values), pos=self.pos(start))
            else:
                init = self.parse_expr()
        if self.at(","):
            raise self.error("declare one variable per statement")
        self.expect(";")
        return n.VarDecl(type_tok.text, name.text, size, init, pos=self.pos(type_tok))

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> n.Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unexpected end of input, expected '}'")
            stmts.append(self.parse_statement())
        self.expect("}")
        return n.Block(tuple(stmts), pos=self.pos(start))

    def parse_body(self) -> n.Block:
        """A braced block, or a single statement wrapped in a block."""
        if self.at("{"):
            return self.parse_block()
        start = self.tok
        return n.Block((self.parse_statement(),), pos=self.pos(start))

    def parse_statement(self):
        t = self.tok
        p = self.pos()
        if t.kind == "pragma":
            return self.parse_pragma()
        if self.at("{"):
            return self.parse_block()
        if t.kind == "keyword":
            kw = t.text
            if kw in TYPES:
                self.i += 1
                if kw == "void":
                    raise self.error("variable declared void", t)
                name = self.expect_ident()
                return self.finish_decl(t, name)
            if kw == "if":
                self.i += 1
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                then = self.parse_body()
                orelse = None
                if self.accept("else"):
                    orelse = self.parse_body()
                return n.If(cond, then, orelse, pos=p)
            if kw == "for":
                return self.parse_for()
            if kw == "while":
                self.i += 1
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                return n.WhileLoop(cond, self.parse_body(), pos=p)
            if kw == "do":
                self.i += 1
                body = self.parse_body()
                self.expect("while")
                self.expect("(")
                cond = self.parse_expr()
                self.expect(")")
                self.expect(";")
                return n.DoWhileLoop(body, cond, pos=p)
            if kw == "switch":
                return self.parse_switch()
            if kw == "return":
                self.i += 1
                value = None if self.at(";") else self.parse_expr()
                self.expect(";")
                return n.Return(value, pos=p)
            if kw == "break":
                self.i += 1
                self.expect(";")
                return n.Break(pos=p)
            if kw == "continue":
                self.i += 1
                self.expect(";")
                return n.Continue(pos=p)
            raise self.error(f"unexpected keyword '{kw}'")
        if self.at(";"):
            self.i += 1
            return n.Block((), pos=p)
        stmt = self.parse_simple()
        self.expect(";")
        return stmt

    def parse_simple(self):
        """Assignment, increment, or expression statement (no trailing ';')."""
        p = self.pos()
        if self.at("++") or self.at("--"):
            op = self.tok.text
            self.i += 1
            target = self.parse_unary()
            self.check_lvalue(target)
            return n.Assign(target, n.IntLit(1, pos=p), "+=" if op == "++" else "-=", pos=p)
        lhs = self.parse_binary(1)
        if self.tok.kind == "punct" and self.tok.text in ASSIGN_OPS:
            op = self.tok.text
            self.check_lvalue(lhs)
            self.i += 1
            return n.Assign(lhs, self.parse_expr(), op, pos=p)
        if self.at("++") or self.at("--"):
            op = self.tok.text
            self.check_lvalue(lhs)
            self.i += 1
            return n.Assign(lhs, n.IntLit(1, pos=p), "+=" if op == "++" else "-=", pos=p)
        return n.ExprStmt(lhs, pos=p)

    def check_lvalue(self, e):
        if not isinstance(e, (n.Name, n.Index)):
            raise self.error("left side of assignment is not assignable")

    def parse_for(self) -> n.ForLoop:
        p = self.pos()
        self.expect("for")
        self.expect("(")
        decl_type = None
        if self.tok.kind == "keyword" and self.tok.text in ("int",):
            decl_type = self.tok.text
            self.i += 1
        var_tok = self.expect_ident("loop variable")
        var = var_tok.text
        self.expect("=")
        init = self.parse_expr()
        self.expect(";")
        cond_tok = self.tok
        cond = self.parse_expr()
        if not (isinstance(cond, n.Binary) and cond.op in ("<", "<=")
                and cond.left == n.Name(var)):
            raise ValidationError([self.src.diag(
                cond_tok.offset, f"non-canonical for loop: condition must be '{var} < bound' or '{var} <= bound'")])
        self.expect(";")
        step_tok = self.tok
        step = self.parse_step(var, step_tok)
        self.expect(")")
        body = self.parse_body()
        return n.ForLoop(var, init, cond.op, cond.right, step, body, decl_type, pos=p)

    def parse_step(self, var: str, step_tok: Token):
        bad = ValidationError([self.src.diag(
            step_tok.offset, f"non-canonical for loop: increment must be '{var}++' or '{var} += step'")])
        stmt = self.parse_simple()
        if not isinstance(stmt, n.Assign) or stmt.target != n.Name(var):
            raise bad
        if stmt.op == "+=":
            return stmt.value
        if (stmt.op == "=" and isinstance(stmt.value, n.Binary) and stmt.value.op == "+"
                and stmt.value.left == n.Name(var)):
            return stmt.value.right
        raise bad

    def parse_switch(self) -> n.Switch:
        p = self.pos()
        self.expect("switch")
        self.expect("(")
        subject = self.parse_expr()
        self.expect(")")
        self.expect("{")
        cases = []
        default = None
        while not self.at("}"):
            cp = self.pos()
            if self.accept("case"):
                neg = bool(self.accept("-"))
                if self.tok.kind != "int":
                    raise self.error("case label must be an integer constant")
                value = int(self.tok.text) * (-1 if neg else 1)
                self.i += 1
                self.expect(":")
                cases.append(n.Case(value, self.parse_case_body(), pos=cp))
            elif self.accept("default"):
                self.expect(":")
                if default is not None:
                    raise self.error("duplicate default label")
                default = self.parse_case_body()
            else:
                raise self.error("expected 'case' or 'default'")
        self.expect("}")
        return n.Switch(subject, tuple(cases), default, pos=p)

    def parse_case_body(self) -> n.Block:
        p = self.pos()
        stmts = []
        while not (self.at("case") or self.at("default") or self.at("}")):
            stmts.append(self.parse_statement())
        return n.Block(tuple(stmts), pos=p)

    # -- pragmas -------------------------------------------------------------

    def parse_pragma(self):
        ptok = self.tok
        p = self.pos()
        self.i += 1
        if not self.at_ident("omp"):
            raise self.error("only '#pragma omp' directives are supported")
        self.i += 1
        d = self.tok
        if d.kind not in ("ident", "keyword"):
            raise self.error(f"expected OpenMP directive but found '{d.text or 'end of input'}'")
        self.i += 1
        directive = d.text
        clauses = self.parse_clauses()
        if directive == "parallel":
            self.allow_clauses(clauses, ("num_threads",), d)
            body = self.parse_body()
            return n.ParallelRegion(body, clauses.get("num_threads"), pos=p)
        if directive == "for":
            self.allow_clauses(clauses, ("schedule", "nowait"), d)
            if not self.at("for"):
                raise self.error("'#pragma omp for' must be followed by a for loop")
            loop = self.parse_for()
            kind, chunk = clauses.get("schedule", (None, None))
            return n.OmpFor(loop, kind, chunk, "nowait" in clauses, pos=p)
        if directive == "sections":
            self.allow_clauses(clauses, ("nowait",), d)
            self.expect("{")
            sections = []
            while not self.at("}"):
                if not (self.tok.kind == "pragma" and self.peek().text == "omp"
                        and self.peek(2).text == "section"):
                    raise self.error("expected '#pragma omp section'")
                self.i += 3
                sections.append(self.parse_body())
            self.expect("}")
            if not sections:
                raise self.error("sections construct without any section", ptok)
            return n.OmpSections(tuple(sections), "nowait" in clauses, pos=p)
        if directive == "single":
            self.allow_clauses(clauses, ("nowait",), d)
            return n.OmpSingle(self.parse_body(), "nowait" in clauses, pos=p)
        if directive == "barrier":
            self.allow_clauses(clauses, (), d)
            return n.Barrier(pos=p)
        if directive == "atomic":
            self.allow_clauses(clauses, ("write",), d)
            stmt = self.parse_simple()
            self.expect(";")
            if not isinstance(stmt, n.Assign):
                raise self.error("'#pragma omp atomic' must be followed by an assignment", ptok)
            return n.AtomicWrite(stmt, pos=p)
        if directive == "section":
            raise self.error("'#pragma omp section' outside a sections construct", d)
        raise self.error(f"unsupported OpenMP directive '{directive}'", d)

    def parse_clauses(self) -> dict:
        clauses = {}
        while self.tok.kind == "ident" and self.tok.text in CLAUSES:
            name = self.tok.text
            if name in ("schedule", "num_threads") and self.peek().text != "(":
                break
            if name in clauses:
                raise self.error(f"duplicate clause '{name}'")
            self.i += 1
            if name == "schedule":
                self.expect("(")
                kind = self.expect_ident("schedule kind")
                if kind.text not in SCHEDULE_KINDS:
                    raise self.error(f"unknown schedule kind '{kind.text}'", kind)
                chunk = None
                if self.accept(","):
                    chunk = self.parse_expr()
                self.expect(")")
                clauses[name] = (kind.text, chunk)
            elif name == "num_threads":
                self.expect("(")
                clauses[name] = self.parse_expr()
                self.expect(")")
            else:
                clauses[name] = True
        return clauses

    def allow_clauses(self, clauses: dict, allowed, d: Token):
        for c in clauses:
            if c not in allowed:
                raise self.error(f"clause '{c}' is not valid on '{d.text}'", d)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self):
        p = self.pos()
        lhs = self.parse_binary(1)
        if self.at("="):
            self.check_lvalue(lhs)
            self.i += 1
            return n.AssignExpr(lhs, self.parse_expr(), pos=p)
        return lhs

    def parse_binary(self, min_prec: int):
        lhs = self.parse_unary()
        while True:
            t = self.tok
            prec = BINARY_PREC.get(t.text) if t.kind == "punct" else None
            if prec is None or prec < min_prec:
                return lhs
            self.i += 1
            rhs = self.parse_binary(prec + 1)
            lhs = n.Binary(t.text, lhs, rhs, pos=lhs.pos)

    def parse_unary(self):
        t = self.tok
        if t.kind == "punct" and t.text in UNARY_OPS:
            self.i += 1
            return n.Unary(t.text, self.parse_unary(), pos=self.pos(t))
        return self.parse_primary()

    def parse_primary(self):
        t = self.tok
        p = self.pos()
        if t.kind == "int":
            self.i += 1
            return n.IntLit(int(t.text), pos=p)
        if t.kind == "float":
            self.i += 1
            return n.FloatLit(float(t.text), pos=p)
        if t.kind == "ident":
            self.i += 1
            if self.accept("("):
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                return n.Call(t.text, tuple(args), pos=p)
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                if self.at("["):
                    raise self.error("only one-dimensional arrays are supported")
                return n.Index(t.text, idx, pos=p)
            return n.Name(t.text, pos=p)
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        found = t.text or "end of input"
        raise self.error(f"expected expression but found '{found}'")


def parse_source(src: SourceProgram) -> n.Program:
    """Parse without validation."""
    return Parser(src).parse_program()
