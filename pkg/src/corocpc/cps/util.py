"""AST helpers shared by the translation passes."""
from __future__ import annotations

import copy
from typing import Callable

from ..lang import ast as A
from ..lang.prelude import BUILTINS

RESERVED_PREFIX = "__cpc_"


class NameSupply:
    """Fresh identifiers ``__cpc_<fn>_<n>`` that avoid every name already in use."""

    def __init__(self, program: A.Program):
        self.used = set(BUILTINS)
        for d in program.decls:
            self.used.add(d.name)
            if isinstance(d, A.Function):
                self.used.update(d.param_names)
                if d.body is not None:
                    self.add_body(d.body)
        self.counters: dict = {}

    def add_body(self, body: A.Block):
        for s in A.walk_stmts(body):
            if isinstance(s, A.VarDecl):
                self.used.add(s.name)
            elif isinstance(s, A.Label):
                self.used.add(s.name)
            elif isinstance(s, A.FunDef):
                self.used.add(s.func.name)
                self.used.update(s.func.param_names)

    def reserve(self, name: str) -> str:
        self.used.add(name)
        return name

    def named(self, fn: str, hint: str) -> str:
        """``__cpc_<fn>_<hint>`` if free, otherwise a numbered variant."""
        base = f"{RESERVED_PREFIX}{fn}_{hint}"
        if base not in self.used:
            return self.reserve(base)
        return self.fresh(fn)

    def fresh(self, fn: str) -> str:
        n = self.counters.get(fn, 0)
        while True:
            name = f"{RESERVED_PREFIX}{fn}_{n}"
            n += 1
            if name not in self.used:
                self.counters[fn] = n
                return self.reserve(name)


def clone(x):
    return copy.deepcopy(x)


def is_suspending_call(e: A.Expr) -> bool:
    """A call that may give up control: the callee type is coroutine and not need-cont."""
    return isinstance(e, A.Call) and isinstance(e.callee.ty, A.FunType) and e.callee.ty.ann.suspends


def has_suspending(e) -> bool:
    if e is None:
        return False
    return any(is_suspending_call(x) for x in A.walk_expr(e))


def stmt_has_suspending(s: A.Stmt) -> bool:
    return any(has_suspending(e) for x in A.walk_stmts(s) for e in A.stmt_exprs(x))


def map_expr(e: A.Expr, fn: Callable) -> A.Expr:
    """Rebuild ``e`` bottom-up, applying ``fn`` to each node after its children."""
    if isinstance(e, (A.AddrOf, A.Deref, A.UnOp, A.Cast)):
        e.operand = map_expr(e.operand, fn)
    elif isinstance(e, A.BinOp):
        e.left = map_expr(e.left, fn)
        e.right = map_expr(e.right, fn)
    elif isinstance(e, A.Call):
        e.callee = map_expr(e.callee, fn)
        e.args = [map_expr(a, fn) for a in e.args]
    elif isinstance(e, A.Push):
        e.fn = map_expr(e.fn, fn)
        e.args = [map_expr(a, fn) for a in e.args]
        e.cont = map_expr(e.cont, fn)
    elif isinstance(e, A.Invoke):
        e.cont = map_expr(e.cont, fn)
        if e.value is not None:
            e.value = map_expr(e.value, fn)
    return fn(e)


def map_stmt_exprs(s: A.Stmt, fn: Callable, into_fundefs: bool = False):
    """Apply ``map_expr(·, fn)`` to every expression under statement ``s`` (in place)."""
    for x in A.walk_stmts(s, into_fundefs):
        if isinstance(x, A.VarDecl) and x.init is not None:
            x.init = map_expr(x.init, fn)
        elif isinstance(x, A.Assign):
            x.value = map_expr(x.value, fn)
            x.target = map_expr(x.target, fn)
        elif isinstance(x, (A.If, A.While)):
            x.cond = map_expr(x.cond, fn)
        elif isinstance(x, A.Return) and x.value is not None:
            x.value = map_expr(x.value, fn)
        elif isinstance(x, A.ExprStmt):
            x.expr = map_expr(x.expr, fn)


_NEGATE = {"<": ">=", ">=": "<", ">": "<=", "<=": ">", "==": "!=", "!=": "=="}


def negate(c: A.Expr) -> A.Expr:
    """Condition true exactly when ``c`` is false (comparisons flipped, ``!`` removed)."""
    if isinstance(c, A.BinOp) and c.op in _NEGATE:
        return A.BinOp(_NEGATE[c.op], c.left, c.right, pos=c.pos, ty=A.INT)
    if isinstance(c, A.UnOp) and c.op == "!":
        return c.operand
    return A.UnOp("!", c, pos=c.pos, ty=A.INT)


def tail_call(fn_name: str, ftype: A.FunType, args: list, ret: A.Type, pos=A.NOPOS) -> list:
    """``f(args); return;`` in void functions, ``return f(args);`` otherwise."""
    call = A.Call(A.FunRef(fn_name, pos=pos, ty=ftype), args, pos=pos, ty=ftype.ret)
    if ret == A.VOID:
        return [A.ExprStmt(call, pos=pos), A.Return(None, pos=pos)]
    return [A.Return(call, pos=pos)]


def is_terminator(s: A.Stmt) -> bool:
    return isinstance(s, (A.Return, A.Goto))


def coroutine_functions(p: A.Program) -> list:
    return [f for f in p.defined_functions() if f.is_coroutine]
