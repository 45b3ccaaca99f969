"""AST node classes for the mini-OpenMP dialect.

Nodes are frozen dataclasses holding tuples, so structural equality and
hashing come for free.  Source positions are carried in ``pos`` but are
excluded from comparison, which is what the round-trip law needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Tuple, Union

Pos = Tuple[int, int]


def _pos():
    return field(default=(0, 0), compare=False, repr=False, hash=False)


class Node:
    """Marker base class."""

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if f.name == "pos":
                continue
            val = getattr(self, f.name)
            if isinstance(val, Node):
                yield val
            elif isinstance(val, tuple):
                for item in val:
                    if isinstance(item, Node):
                        yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(n.children())))


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class IntLit(Node):
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class FloatLit(Node):
    value: float
    pos: Pos = _pos()


@dataclass(frozen=True)
class Name(Node):
    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Index(Node):
    array: str
    index: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: Tuple["Expr", ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class AssignExpr(Node):
    """Assignment used as a value, e.g. ``(i = doitr(tid)) != -1``."""
    target: Union[Name, Index]
    value: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ArrayInit(Node):
    """Brace initializer of an array declaration."""
    values: Tuple["Expr", ...]
    pos: Pos = _pos()


Expr = Union[IntLit, FloatLit, Name, Index, Call, Unary, Binary, AssignExpr]
LValue = Union[Name, Index]


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Block(Node):
    stmts: Tuple["Stmt", ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class VarDecl(Node):
    type: str
    name: str
    size: Optional[Expr] = None
    init: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign(Node):
    target: LValue
    value: Expr
    op: str = "="
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: Block
    orelse: Optional[Block] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class ForLoop(Node):
    """Counted loop ``for (var = init; var cmp bound; var += step)``."""
    var: str
    init: Expr
    cmp: str
    bound: Expr
    step: Expr
    body: Block
    decl_type: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class WhileLoop(Node):
    cond: Expr
    body: Block
    pos: Pos = _pos()


@dataclass(frozen=True)
class DoWhileLoop(Node):
    body: Block
    cond: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Case(Node):
    value: int
    body: Block
    pos: Pos = _pos()


@dataclass(frozen=True)
class Switch(Node):
    subject: Expr
    cases: Tuple[Case, ...]
    default: Optional[Block] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Break(Node):
    pos: Pos = _pos()


@dataclass(frozen=True)
class Continue(Node):
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Barrier(Node):
    pos: Pos = _pos()


@dataclass(frozen=True)
class ParallelRegion(Node):
    body: Block
    num_threads: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class OmpFor(Node):
    loop: ForLoop
    schedule: Optional[str] = None
    chunk: Optional[Expr] = None
    nowait: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class OmpSections(Node):
    sections: Tuple[Block, ...]
    nowait: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class OmpSingle(Node):
    body: Block
    nowait: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class AtomicWrite(Node):
    assign: Assign
    pos: Pos = _pos()


Stmt = Union[
    Block, VarDecl, Assign, ExprStmt, If, ForLoop, WhileLoop, DoWhileLoop,
    Switch, Break, Continue, Return, Barrier, ParallelRegion, OmpFor,
    OmpSections, OmpSingle, AtomicWrite,
]

WORKSHARING = (OmpFor, OmpSections, OmpSingle)


# -- top level ---------------------------------------------------------------

@dataclass(frozen=True)
class Param(Node):
    type: str
    name: str
    is_array: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class FunctionDef(Node):
    ret_type: str
    name: str
    params: Tuple[Param, ...]
    body: Block
    pos: Pos = _pos()


@dataclass(frozen=True)
class Program(Node):
    items: Tuple[Union[VarDecl, FunctionDef], ...] = ()
    pos: Pos = _pos()

    @property
    def functions(self) -> Tuple[FunctionDef, ...]:
        return tuple(i for i in self.items if isinstance(i, FunctionDef))

    @property
    def globals(self) -> Tuple[VarDecl, ...]:
        return tuple(i for i in self.items if isinstance(i, VarDecl))

    def function(self, name: str) -> Optional[FunctionDef]:
        for f in self.functions:
            if f.name == name:
                return f
        return None


# alias matching the domain vocabulary
Ast = Program
