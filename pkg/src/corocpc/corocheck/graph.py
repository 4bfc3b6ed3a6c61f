"""Call graph of one translation unit."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..lang import ast as A
from ..lang.printer import expr_text
from ..lang.prelude import BUILTINS
from ..lang.typecheck import TypedProgram


@dataclass
class Node:
    id: str
    label_text: str  # function name or callee expression text
    defined: bool
    given: A.Annotation
    address_retained: bool = False
    indirect: bool = False
    pos: A.Pos = field(default=A.NOPOS, compare=False)

    @property
    def extern(self) -> bool:
        return not self.defined and not self.indirect


@dataclass(frozen=True)
class Edge:
    caller: str
    callee: str
    site: int
    indirect: bool
    pos: A.Pos = field(default=A.NOPOS, compare=False)


@dataclass
class CallGraph:
    nodes: dict = field(default_factory=dict)  # id -> Node
    edges: list = field(default_factory=list)

    def add_node(self, node: Node) -> Node:
        return self.nodes.setdefault(node.id, node)

    def callees(self, nid: str) -> list:
        return [e.callee for e in self.edges if e.caller == nid]

    def successors(self) -> dict:
        succ = {n: [] for n in self.nodes}
        for e in self.edges:
            succ[e.caller].append(e.callee)
        return succ

    def predecessors(self) -> dict:
        pred = {n: [] for n in self.nodes}
        for e in self.edges:
            pred[e.callee].append(e.caller)
        return pred

    def subgraph(self, keep: set) -> "CallGraph":
        nodes = {k: v for k, v in self.nodes.items() if k in keep}
        edges = [e for e in self.edges if e.caller in keep and e.callee in keep]
        return CallGraph(nodes, edges)


def indirect_id(call: A.Call, owner: str) -> tuple:
    """(node id, expression text) of an indirect callee.

    Calls through locals are qualified by the enclosing function, since the
    same local name in two functions denotes two different pointers.
    """
    text = expr_text(call.callee)
    local = any(isinstance(e, A.Var) and e.scope in ("local", "param") for e in A.walk_expr(call.callee))
    return (f"*{owner}::{text}" if local else f"*{text}"), text


def retained_functions(e: A.Expr) -> list:
    """Functions whose address escapes as a value inside ``e`` (callee positions excluded)."""
    out = []

    def visit(x: A.Expr, callee_pos: bool):
        if isinstance(x, A.FunRef):
            if not callee_pos:
                out.append(x)
            return
        if isinstance(x, A.Call):
            visit(x.callee, True)
            for a in x.args:
                visit(a, False)
            return
        if isinstance(x, (A.AddrOf, A.Deref)) and callee_pos:
            visit(x.operand, True)
            return
        for c in x.children():
            visit(c, False)

    visit(e, False)
    return out


def _top_exprs(d) -> list:
    if isinstance(d, A.GlobalDecl):
        return [d.init] if d.init is not None else []
    if d.body is None:
        return []
    return [e for s in A.walk_stmts(d.body) for e in A.stmt_exprs(s)]


def build_call_graph(tp: TypedProgram) -> CallGraph:
    p = tp.program
    g = CallGraph()
    for f in p.functions:
        node = g.nodes.get(f.name)
        if node is None:
            g.add_node(Node(f.name, f.name, f.is_defined, f.annotation, pos=f.pos))
        elif f.is_defined:
            node.defined = True
            node.given = f.annotation
            node.pos = f.pos

    def fn_node(name: str, pos: A.Pos) -> str:
        if name not in g.nodes:
            t = tp.functions.get(name) or BUILTINS[name]
            g.add_node(Node(name, name, False, t.ann, pos=pos))
        return name

    for d in p.decls:
        owner = d.name if isinstance(d, A.Function) else None
        for top in _top_exprs(d):
            for ref in retained_functions(top):
                g.nodes[fn_node(ref.name, ref.pos)].address_retained = True
            if owner is None:
                continue
            for e in A.walk_expr(top):
                if not isinstance(e, A.Call):
                    continue
                name = A.direct_callee(e)
                if name is not None:
                    g.edges.append(Edge(owner, fn_node(name, e.pos), e.site, False, e.pos))
                    continue
                nid, text = indirect_id(e, owner)
                ann = e.callee.ty.ann if isinstance(e.callee.ty, A.FunType) else A.NATIVE_ANN
                g.add_node(Node(nid, text, False, ann, indirect=True, pos=e.pos))
                g.edges.append(Edge(owner, nid, e.site, True, e.pos))
    return g


def annotation_of_call(call: A.Call) -> Optional[A.Annotation]:
    """Convention of a call, read off the callee expression's type alone."""
    t = call.callee.ty
    return t.ann if isinstance(t, A.FunType) else None
