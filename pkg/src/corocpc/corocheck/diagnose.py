"""Findings: annotation mismatches, forbidden edges, and convention loss in value flow."""
from __future__ import annotations

from dataclasses import dataclass

from ..lang import ast as A
from ..lang.printer import annotation_text, expr_text
from ..lang.typecheck import TypedProgram
from .graph import CallGraph, Node, indirect_id
from .infer import InferenceResult

MISSING = "MissingCoroutine"
SPURIOUS = "SpuriousCoroutine"
WRONG_BLOCKING = "WrongBlocking"
BLOCKING_CALL = "BlockingCalledFromCoroutine"
ANNOTATION_LOSS = "AnnotationLoss"
POINTER_INCONSISTENT = "PointerUseInconsistent"
HYBRID = "HybridFunction"

KIND_ORDER = [MISSING, SPURIOUS, WRONG_BLOCKING, BLOCKING_CALL, ANNOTATION_LOSS, POINTER_INCONSISTENT, HYBRID]
INFORMATIONAL = {HYBRID}
# kinds that mark a node as mismatching in the drawn graph
NODE_MISMATCH = {MISSING, SPURIOUS, WRONG_BLOCKING}


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    subject: str
    message: str
    pos: A.Pos

    @property
    def line(self) -> int:
        return self.pos.line

    @property
    def column(self) -> int:
        return self.pos.col

    @property
    def informational(self) -> bool:
        return self.kind in INFORMATIONAL

    def sort_key(self) -> tuple:
        return (self.pos.line, self.pos.col, KIND_ORDER.index(self.kind), self.subject)

    def to_json(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "line": self.line, "column": self.column, "message": self.message}

    def __str__(self) -> str:
        tag = "note" if self.informational else "warning"
        return f"{self.line}:{self.column}: {tag}: {self.kind}: {self.message}"


def sort_diagnostics(ds) -> list:
    return sorted(set(ds), key=Diagnostic.sort_key)


def edge_subject(caller: str, callee: str) -> str:
    return f"{caller}->{callee}"


def diagnose(tp: TypedProgram, g: CallGraph, r: InferenceResult) -> list:
    out = []
    for n in g.nodes.values():
        coro = r.is_coroutine(n.id)
        if n.defined:
            if coro and n.given.is_blocking:
                out.append(Diagnostic(WRONG_BLOCKING, n.id, f"{n.id} is annotated blocking_fn but calls coroutine functions", n.pos))
            elif coro and not n.given.is_coroutine:
                out.append(Diagnostic(MISSING, n.id, f"{n.id} calls coroutine functions and should be annotated as a coroutine", n.pos))
            elif not coro and n.given.is_coroutine and n.id not in r.roots:
                out.append(Diagnostic(SPURIOUS, n.id, f"{n.id} is annotated as a coroutine but calls no coroutine function", n.pos))
    for e in g.edges:
        caller, callee = g.nodes[e.caller], g.nodes[e.callee]
        if callee.given.is_blocking and (r.is_coroutine(caller.id) or caller.given.is_coroutine):
            out.append(Diagnostic(BLOCKING_CALL, edge_subject(caller.id, callee.id),
                                  f"coroutine {caller.id} calls blocking function {callee.label_text} (call site {e.site})", e.pos))
    for e in g.edges:
        if e.callee == "in_coroutine" and e.caller in g.nodes:
            n = g.nodes[e.caller]
            out.append(Diagnostic(HYBRID, n.id, f"{n.id} tests in_coroutine and behaves differently in and out of coroutine context", n.pos))
    return sort_diagnostics(out)


# --------------------------------------------------------------------------
# value flow


def _conventions(t: A.FunType) -> str:
    return annotation_text(t.ann) or "native"


def _origin(e: A.Expr):
    """The function named by a value expression, looking through casts and ``&``."""
    while isinstance(e, (A.Cast, A.AddrOf)):
        e = e.operand
    return e.name if isinstance(e, A.FunRef) else None


class _Flow:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.out: list = []
        self.stores: dict = {}  # function name -> {annotation: first pos}

    def flow(self, dest: A.Type, src: A.Expr, pos: A.Pos, what: str):
        st = src.ty
        if not (isinstance(dest, A.FunType) and isinstance(st, A.FunType)):
            return
        if dest.same_base(st) and not dest.compatible(st):
            self.out.append(Diagnostic(ANNOTATION_LOSS, what,
                                       f"{what}: {_conventions(st)} function value used where {_conventions(dest)} is expected ({dest})", pos))
        name = _origin(src)
        if name is not None:
            self.stores.setdefault(name, {}).setdefault(dest.ann, pos)

    def expr(self, e: A.Expr, owner: str):
        for x in A.walk_expr(e):
            if isinstance(x, A.Cast):
                self.flow(x.type, x.operand, x.pos, "cast")
            elif isinstance(x, A.Call) and isinstance(x.callee.ty, A.FunType):
                params = x.callee.ty.params
                name = A.direct_callee(x) or indirect_id(x, owner)[1]
                for i, (pt, a) in enumerate(zip(params, x.args)):
                    self.flow(pt, a, a.pos, f"argument {i + 1} of {name}")

    def run(self) -> list:
        p = self.tp.program
        for d in p.decls:
            if isinstance(d, A.GlobalDecl):
                if d.init is not None:
                    self.flow(d.type, d.init, d.pos, d.name)
                    self.expr(d.init, "")
                continue
            if d.body is None:
                continue
            for s in A.walk_stmts(d.body):
                if isinstance(s, A.VarDecl) and s.init is not None:
                    self.flow(s.type, s.init, s.pos, s.name)
                elif isinstance(s, A.Assign) and s.target.ty is not None:
                    self.flow(s.target.ty, s.value, s.pos, expr_text(s.target))
                for e in A.stmt_exprs(s):
                    self.expr(e, d.name)
        for name, anns in self.stores.items():
            if len(anns) > 1:
                pos = sorted(anns.values(), key=lambda q: (q.line, q.col))[1]
                kinds = ", ".join(sorted(_conventions(A.FunType(ann=a)) for a in anns))
                self.out.append(Diagnostic(POINTER_INCONSISTENT, name, f"{name} is stored under conflicting conventions ({kinds})", pos))
        return self.out


def check_value_flow(tp: TypedProgram) -> list:
    return sort_diagnostics(_Flow(tp).run())


def node_label(n: Node) -> str:
    ann = annotation_text(n.given)
    return f"{n.label_text} {ann}" if ann else n.label_text
