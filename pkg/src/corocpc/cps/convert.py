"""CPS conversion of lifted coroutine functions.

Each coroutine function gains a trailing ``cont *k`` parameter:

* ``f(a); return;`` / ``return f(a);`` become ``f(a, k); return;``
* ``[x =] e(a); n(b); return;`` becomes ``e(a, push(n, b', k)); return;``
  where ``b'`` has ``__cpc_retval`` in place of ``x``
* ``return [v];`` becomes ``invoke(k[, v]); return;``

Need-cont primitives receive ``k`` inside coroutines and ``nullcont``
elsewhere.  Every function type carrying the coroutine convention is
rewritten, so indirect calls through pointers keep working.
"""
from __future__ import annotations

from ..lang import ast as A
from ..lang.errors import LangError
from ..lang.prelude import cps_type
from ..lang.typecheck import TypedProgram, typecheck
from .form import _stores_result, tail_call_at
from .util import NameSupply, clone, is_suspending_call, map_expr, map_stmt_exprs


class TranslationError(LangError):
    pass


class IllegalNativeToCpsCall(TranslationError):
    pass


class CpsFormViolation(TranslationError):
    pass


class LinearityViolation(TranslationError):
    pass


class RefusesHybrid(TranslationError):
    pass


def _function_names(f: A.Function) -> set:
    used = set(f.param_names)
    if f.body is not None:
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.VarDecl):
                used.add(s.name)
        for e in A.walk_exprs(f.body):
            if isinstance(e, A.Var):
                used.add(e.name)
    return used


def cont_name(f: A.Function, names: NameSupply) -> str:
    return "k" if "k" not in _function_names(f) else names.fresh(f.name)


def _rewrite_types(p: A.Program):
    for d in p.decls:
        d.type = cps_type(d.type)
        if isinstance(d, A.Function) and d.body is not None:
            for s in A.walk_stmts(d.body):
                if isinstance(s, A.VarDecl):
                    s.type = cps_type(s.type)
            for e in A.walk_exprs(d.body):
                if isinstance(e, A.Cast):
                    e.type = cps_type(e.type)
        elif isinstance(d, A.GlobalDecl) and d.init is not None:
            for e in A.walk_expr(d.init):
                if isinstance(e, A.Cast):
                    e.type = cps_type(e.type)


class _Converter:
    def __init__(self, f: A.Function, k: str):
        self.f = f
        self.k = k

    def kvar(self, pos=A.NOPOS) -> A.Var:
        return A.Var(self.k, pos=pos, scope="param")

    def needcont(self, e):
        if isinstance(e, A.Call) and isinstance(e.callee.ty, A.FunType) and e.callee.ty.ann.need_cont:
            e.args = e.args + [self.kvar(e.pos)]
        return e

    def fix(self, e: A.Expr) -> A.Expr:
        if is_suspending_call(e):
            raise CpsFormViolation(f"{self.f.name}: suspending call not in tail position", e.pos)
        return map_expr(e, self.needcont)

    def plain(self, s: A.Stmt) -> A.Stmt:
        for x in A.walk_stmts(s):
            for e in A.stmt_exprs(x):
                for y in A.walk_expr(e):
                    if is_suspending_call(y):
                        raise CpsFormViolation(f"{self.f.name}: suspending call not in tail position", y.pos)
        map_stmt_exprs(s, self.needcont)
        return s

    def cps_call(self, call: A.Call, cont: A.Expr) -> list:
        call.callee = map_expr(call.callee, self.needcont)
        call.args = [map_expr(a, self.needcont) for a in call.args] + [cont]
        return [A.ExprStmt(call, pos=call.pos), A.Return(None, pos=call.pos)]

    def tail_of(self, stmts: list, i: int):
        """(call, length) of the tail call at ``stmts[i]``."""
        n = tail_call_at(stmts, i, self.f.ret)
        if not n:
            return None, 0
        s = stmts[i]
        return (s.value if isinstance(s, A.Return) else s.expr), n

    def stmts(self, stmts: list, top: bool) -> list:
        out = []
        i, n = 0, len(stmts)
        while i < n:
            s = stmts[i]
            call, used = self.tail_of(stmts, i)
            if call is not None:
                out.extend(self.cps_call(call, self.kvar(call.pos)))
                return out
            if _stores_result(s) and i + 1 < n:
                nxt, used = self.tail_of(stmts, i + 1)
                if nxt is not None:
                    first = s.expr if isinstance(s, A.ExprStmt) else s.value
                    slot = s.target.name if isinstance(s, A.Assign) else None
                    args = []
                    for a in nxt.args:
                        if slot is not None and isinstance(a, A.Var) and a.name == slot:
                            args.append(A.RetSlot(pos=a.pos))
                        else:
                            args.append(self.fix(a))
                    push = A.Push(map_expr(nxt.callee, self.needcont), args, self.kvar(s.pos), pos=s.pos)
                    out.extend(self.cps_call(first, push))
                    return out
            if isinstance(s, A.Return):
                value = self.fix(s.value) if s.value is not None else None
                if value is None and self.f.ret == A.INT:
                    value = A.IntLit(0, pos=s.pos)
                out.append(A.ExprStmt(A.Invoke(self.kvar(s.pos), value, pos=s.pos), pos=s.pos))
                out.append(A.Return(None, pos=s.pos))
                return out
            if isinstance(s, A.If):
                s.cond = self.fix(s.cond)
                s.then.stmts = self.stmts(s.then.stmts, False)
                if s.else_ is not None:
                    s.else_.stmts = self.stmts(s.else_.stmts, False)
                out.append(s)
            elif isinstance(s, A.Block):
                s.stmts = self.stmts(s.stmts, False)
                out.append(s)
            elif isinstance(s, (A.While, A.Goto, A.Label, A.FunDef)):
                raise CpsFormViolation(f"{self.f.name}: {type(s).__name__.lower()} in converted code", s.pos)
            else:
                out.append(self.plain(s))
            i += 1
        if top:
            value = A.IntLit(0, pos=self.f.pos) if self.f.ret == A.INT else None
            out.append(A.ExprStmt(A.Invoke(self.kvar(self.f.pos), value, pos=self.f.pos), pos=self.f.pos))
            out.append(A.Return(None, pos=self.f.pos))
        return out


def _check_native(f: A.Function):
    for e in A.walk_exprs(f.body):
        if isinstance(e, A.Call) and isinstance(e.callee.ty, A.FunType) and e.callee.ty.ann.is_coroutine:
            from ..lang.printer import expr_text

            raise IllegalNativeToCpsCall(
                f"native function {f.name} calls coroutine function {expr_text(e.callee)}; annotate {f.name} as a coroutine",
                e.pos,
            )


def _nullcont(e):
    if isinstance(e, A.Call) and isinstance(e.callee.ty, A.FunType) and e.callee.ty.ann.need_cont:
        e.args = e.args + [A.NullCont(pos=e.pos)]
    return e


def cps_convert(tp: TypedProgram) -> TypedProgram:
    p = clone(tp.program)
    names = NameSupply(p)
    conts = {}
    for f in p.functions:
        if f.annotation.is_coroutine or f.annotation.need_cont:
            conts[id(f)] = cont_name(f, names) if f.is_defined else "k"
    for f in p.defined_functions():
        if f.is_coroutine:
            f.body.stmts = _Converter(f, conts[id(f)]).stmts(f.body.stmts, True)
        else:
            _check_native(f)
            map_stmt_exprs(f.body, _nullcont)
    _rewrite_types(p)
    for f in p.functions:
        if id(f) in conts:
            f.param_names = list(f.param_names) + [conts[id(f)]]
    p.cps = True
    out = typecheck(p)
    for f in out.program.defined_functions():
        if f.is_coroutine:
            check_linear(f, conts[id(f)])
    return out


# --------------------------------------------------------------------------
# continuation linearity


def _consumes(e: A.Expr, k: str) -> int:
    """Uses of ``k`` that hand the continuation on (need-cont arguments excluded)."""
    n = 0
    for x in A.walk_expr(e):
        if isinstance(x, A.Invoke) and isinstance(x.cont, A.Var) and x.cont.name == k:
            n += 1
        elif isinstance(x, A.Push) and isinstance(x.cont, A.Var) and x.cont.name == k:
            n += 1
        elif isinstance(x, A.Call) and isinstance(x.callee.ty, A.FunType) and x.callee.ty.ann.suspends:
            last = x.args[-1] if x.args else None
            if isinstance(last, A.Var) and last.name == k:
                n += 1
    return n


def check_linear(f: A.Function, k: str):
    """Raise unless ``k`` is consumed exactly once on every path through ``f``."""

    def walk(stmts: list, used: int) -> int | None:
        # returns the count reaching the end of the list (None when every path returned)
        for s in stmts:
            if isinstance(s, A.If):
                used += sum(_consumes(e, k) for e in [s.cond])
                a = walk(s.then.stmts, used)
                b = walk(s.else_.stmts, used) if s.else_ is not None else used
                live = [x for x in (a, b) if x is not None]
                if not live:
                    return None
                if len(set(live)) > 1:
                    raise LinearityViolation(f"{f.name}: paths disagree on uses of {k}", s.pos)
                used = live[0]
                continue
            used += sum(_consumes(e, k) for e in A.stmt_exprs(s))
            if isinstance(s, A.Return):
                if used != 1:
                    raise LinearityViolation(f"{f.name}: continuation {k} used {used} times on a path", s.pos)
                return None
        return used

    end = walk(f.body.stmts, 0)
    if end is not None and end != 1:
        raise LinearityViolation(f"{f.name}: continuation {k} used {end} times on a path", f.pos)
