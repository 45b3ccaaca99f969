from __future__ import annotations

from typing import Dict, List, Set

from ..errors import Diagnostic, ValidationError
from . import nodes as n


def assigned_names(node: n.Node) -> Set[str]:
    """Names written anywhere inside ``node`` (array names count for element writes)."""
    out: Set[str] = set()
    for x in n.walk(node):
        if isinstance(x, (n.Assign, n.AssignExpr)):
            t = x.target
            out.add(t.id if isinstance(t, n.Name) else t.array)
        elif isinstance(x, n.VarDecl):
            out.add(x.name)
        elif isinstance(x, n.ForLoop):
            out.add(x.var)
    return out


def used_names(node: n.Node) -> Set[str]:
    out: Set[str] = set()
    for x in n.walk(node):
        if isinstance(x, n.Name):
            out.add(x.id)
        elif isinstance(x, n.Index):
            out.add(x.array)
    return out


def called_functions(node: n.Node) -> Set[str]:
    return {x.func for x in n.walk(node) if isinstance(x, n.Call)}


def call_graph(program: n.Program) -> Dict[str, Set[str]]:
    names = {f.name for f in program.functions}
    return {f.name: called_functions(f.body) & names for f in program.functions}


def reachable(graph: Dict[str, Set[str]], start: str) -> Set[str]:
    seen: Set[str] = set()
    stack = list(graph.get(start, ()))
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        stack.extend(graph.get(f, ()))
    return seen


def recursive_functions(program: n.Program) -> Set[str]:
    g = call_graph(program)
    return {f for f in g if f in reachable(g, f)}


class _Validator:
    def __init__(self, program: n.Program, path: str):
        self.program = program
        self.path = path
        self.diags: List[Diagnostic] = []
        graph = call_graph(program)
        direct = {f.name for f in program.functions
                  if any(isinstance(x, n.ParallelRegion) for x in n.walk(f.body))}
        # functions that open a parallel region, directly or through calls
        self.spawning = {f for f in graph if f in direct or reachable(graph, f) & direct}

    def err(self, node: n.Node, message: str):
        line, col = node.pos
        self.diags.append(Diagnostic(self.path, line, col, message))

    def run(self):
        seen = set()
        for f in self.program.functions:
            if f.name in seen:
                self.err(f, f"duplicate definition of function '{f.name}'")
            seen.add(f.name)
            self.visit_block(f.body, in_region=False, top_of_region=False)
        if self.diags:
            raise ValidationError(self.diags)

    def visit_block(self, block: n.Block, in_region: bool, top_of_region: bool):
        for s in block.stmts:
            self.visit_stmt(s, in_region, top_of_region)

    def visit_stmt(self, s, in_region: bool, top_of_region: bool):
        if isinstance(s, n.ParallelRegion):
            if in_region:
                self.err(s, "nested parallel region")
                return
            self.visit_block(s.body, in_region=True, top_of_region=True)
            return
        if isinstance(s, (n.OmpFor, n.OmpSections, n.OmpSingle, n.Barrier)):
            what = {n.OmpFor: "omp for", n.OmpSections: "omp sections",
                    n.OmpSingle: "omp single", n.Barrier: "omp barrier"}[type(s)]
            if not in_region:
                self.err(s, f"{what} outside a parallel region")
                return
            if not top_of_region:
                self.err(s, f"{what} must appear directly inside a parallel region body")
                return
            if isinstance(s, n.OmpFor):
                self.check_omp_loop(s)
                self.visit_block(s.loop.body, in_region, False)
            elif isinstance(s, n.OmpSections):
                for sec in s.sections:
                    self.visit_block(sec, in_region, False)
            elif isinstance(s, n.OmpSingle):
                self.visit_block(s.body, in_region, False)
            return
        if in_region:
            for c in called_functions(s) & self.spawning:
                self.err(s, f"nested parallel region (call to '{c}' inside a parallel region)")
        for child in s.children():
            if isinstance(child, n.Block):
                self.visit_block(child, in_region, False)
            elif isinstance(child, n.Case):
                self.visit_block(child.body, in_region, False)

    def check_omp_loop(self, omp: n.OmpFor):
        loop = omp.loop
        if loop.cmp != "<":
            self.err(loop, f"non-canonical omp for loop: condition must be '{loop.var} < bound'")
        if isinstance(loop.step, n.IntLit) and loop.step.value <= 0:
            self.err(loop, "non-canonical omp for loop: step must be positive")
        if isinstance(loop.step, n.Unary) and loop.step.op == "-":
            self.err(loop, "non-canonical omp for loop: step must be positive")
        written = assigned_names(loop.body)
        if loop.var in written:
            self.err(loop, f"non-canonical omp for loop: loop variable '{loop.var}' is modified in the body")
        for label, e in (("lower bound", loop.init), ("upper bound", loop.bound), ("step", loop.step)):
            clash = sorted(used_names(e) & (written | {loop.var}))
            if clash:
                self.err(loop, f"non-canonical omp for loop: {label} is not loop-invariant "
                               f"('{clash[0]}' changes inside the loop)")
        if _escapes(loop.body):
            self.err(loop, "break out of an omp for loop")


def _escapes(block: n.Block) -> bool:
    """True if a ``break`` would leave the enclosing loop (not an inner loop/switch)."""
    for s in block.stmts:
        if isinstance(s, n.Break):
            return True
        if isinstance(s, n.If):
            if _escapes(s.then) or (s.orelse is not None and _escapes(s.orelse)):
                return True
        elif isinstance(s, n.Block):
            if _escapes(s):
                return True
    return False


def validate(program: n.Program, path: str = "<string>") -> n.Program:
    _Validator(program, path).run()
    return program
