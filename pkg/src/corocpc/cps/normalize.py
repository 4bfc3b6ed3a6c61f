"""Control normalization of coroutine functions.

Loops become ``label: if (!c) goto end; body; goto label; end:``.  An ``if``
whose branches contain labels or suspending calls is lowered the same way.
Suspending calls nested inside expressions are hoisted into temporaries so
that each one stands alone as ``f(a);``, ``x = f(a);``, ``int x = f(a);`` or
``return f(a);`` with plain arguments.
"""
from __future__ import annotations

from ..lang import ast as A
from ..lang.typecheck import TypedProgram, typecheck
from .box import uniquify
from .util import (
    NameSupply,
    clone,
    coroutine_functions,
    has_suspending,
    is_suspending_call,
    negate,
    stmt_has_suspending,
)


def _goto_if(cond: A.Expr, label: str, pos) -> A.If:
    return A.If(cond, A.Block([A.Goto(label, pos=pos)], pos=pos), None, pos=pos)


def _has_label(stmts) -> bool:
    return any(isinstance(x, A.Label) for s in stmts for x in A.walk_stmts(s, False))


class _Normalizer:
    def __init__(self, f: A.Function, names: NameSupply):
        self.f = f
        self.names = names

    def label(self) -> str:
        return self.names.fresh(self.f.name)

    # -- control ----------------------------------------------------------

    def lower(self, stmts: list) -> list:
        out = []
        for s in stmts:
            if isinstance(s, A.While):
                top, end = self.label(), self.label()
                out.append(A.Label(top, pos=s.pos))
                out.append(_goto_if(negate(s.cond), end, s.pos))
                out.extend(self.lower(s.body.stmts))
                out.append(A.Goto(top, pos=s.pos))
                out.append(A.Label(end, pos=s.pos))
            elif isinstance(s, A.If):
                then = self.lower(s.then.stmts)
                else_ = self.lower(s.else_.stmts) if s.else_ is not None else None
                branches = then + (else_ or [])
                if _has_label(branches) or any(stmt_has_suspending(x) for x in branches):
                    end = self.label()
                    if else_ is None:
                        out.append(_goto_if(negate(s.cond), end, s.pos))
                        out.extend(then)
                    else:
                        other = self.label()
                        out.append(_goto_if(negate(s.cond), other, s.pos))
                        out.extend(then)
                        out.append(A.Goto(end, pos=s.pos))
                        out.append(A.Label(other, pos=s.pos))
                        out.extend(else_)
                    out.append(A.Label(end, pos=s.pos))
                else:
                    s.then.stmts = then
                    if else_ is not None:
                        s.else_.stmts = else_
                    out.append(s)
            elif isinstance(s, A.Block):
                out.extend(self.lower(s.stmts))
            else:
                out.append(s)
        return out

    # -- hoisting suspending calls ------------------------------------------

    def temp(self, e: A.Expr, out: list) -> A.Var:
        t = self.label()
        out.append(A.VarDecl(t, e.ty, e, pos=e.pos))
        return A.Var(t, pos=e.pos, ty=e.ty, scope="local")

    @staticmethod
    def stable(e: A.Expr) -> bool:
        """Value cannot be changed by running another function."""
        if isinstance(e, (A.IntLit, A.FunRef)):
            return True
        if isinstance(e, A.Var):
            return e.scope in ("local", "param")
        if isinstance(e, A.AddrOf):
            return True
        if isinstance(e, (A.UnOp, A.Cast)):
            return _Normalizer.stable(e.operand)
        if isinstance(e, A.BinOp):
            return _Normalizer.stable(e.left) and _Normalizer.stable(e.right)
        return False

    def operands(self, kids: list, out: list) -> list:
        """Hoist from operands evaluated left to right, pinning earlier ones."""
        last = max((i for i, k in enumerate(kids) if has_suspending(k)), default=-1)
        res = []
        for i, k in enumerate(kids):
            if i < last:
                k = self.pure(k, out)
                if not self.stable(k):
                    k = self.temp(k, out)
            elif i == last:
                k = self.pure(k, out)
            res.append(k)
        return res

    def pure(self, e: A.Expr, out: list) -> A.Expr:
        """Equivalent of ``e`` without suspending calls; hoisted code goes to ``out``."""
        if not has_suspending(e):
            return e
        if isinstance(e, A.Call):
            kids = self.operands([e.callee, *e.args], out)
            e.callee, e.args = kids[0], kids[1:]
            return self.temp(e, out) if is_suspending_call(e) else e
        if isinstance(e, A.BinOp) and e.op in ("&&", "||") and has_suspending(e.right):
            left = self.pure(e.left, out)
            pos = e.pos
            t = self.label()
            end = self.label()
            start = A.IntLit(0 if e.op == "&&" else 1, ty=A.INT, pos=pos)
            out.append(A.VarDecl(t, A.INT, start, pos=pos))
            skip = negate(left) if e.op == "&&" else left
            out.append(_goto_if(skip, end, pos))
            r = self.pure(e.right, out)
            tv = A.Var(t, pos=pos, ty=A.INT, scope="local")
            out.append(A.Assign(tv, A.BinOp("!=", r, A.IntLit(0, ty=A.INT), pos=pos, ty=A.INT), pos=pos))
            out.append(A.Label(end, pos=pos))
            return A.Var(t, pos=pos, ty=A.INT, scope="local")
        if isinstance(e, A.BinOp):
            e.left, e.right = self.operands([e.left, e.right], out)
            return e
        if isinstance(e, (A.UnOp, A.Cast, A.Deref, A.AddrOf)):
            e.operand = self.pure(e.operand, out)
            return e
        raise AssertionError(f"unexpected expression {e!r}")

    def call_form(self, e: A.Expr, out: list) -> A.Expr:
        """A suspending call with plain arguments (the call itself stays)."""
        kids = self.operands([e.callee, *e.args], out)
        e.callee, e.args = kids[0], kids[1:]
        return e

    def anf(self, stmts: list) -> list:
        out: list = []
        for s in stmts:
            if isinstance(s, A.ExprStmt):
                if is_suspending_call(s.expr):
                    s.expr = self.call_form(s.expr, out)
                else:
                    s.expr = self.pure(s.expr, out)
            elif isinstance(s, A.VarDecl) and s.init is not None:
                if is_suspending_call(s.init):
                    s.init = self.call_form(s.init, out)
                else:
                    s.init = self.pure(s.init, out)
            elif isinstance(s, A.Assign):
                local_target = isinstance(s.target, A.Var) and s.target.scope in ("local", "param")
                if is_suspending_call(s.value) and local_target:
                    s.value = self.call_form(s.value, out)
                else:
                    s.value = self.pure(s.value, out)
                    if has_suspending(s.target):
                        # the value is computed before the target's address
                        if not self.stable(s.value):
                            s.value = self.temp(s.value, out)
                        s.target.operand = self.pure(s.target.operand, out)
            elif isinstance(s, A.Return) and s.value is not None:
                if is_suspending_call(s.value):
                    s.value = self.call_form(s.value, out)
                else:
                    s.value = self.pure(s.value, out)
            elif isinstance(s, A.If):
                s.cond = self.pure(s.cond, out)
                s.then.stmts = self.anf(s.then.stmts)
                if s.else_ is not None:
                    s.else_.stmts = self.anf(s.else_.stmts)
            out.append(s)
        return out

    def run(self):
        uniquify(self.f, self.names)
        self.f.body.stmts = self.anf(self.lower(self.f.body.stmts))


def normalize_control(f: A.Function, names: NameSupply) -> A.Function:
    """Normalize one coroutine function in place (names come from ``names``)."""
    _Normalizer(f, names).run()
    return f


def normalize(tp: TypedProgram) -> TypedProgram:
    p = clone(tp.program)
    names = NameSupply(p)
    for f in coroutine_functions(p):
        normalize_control(f, names)
    return typecheck(p)
