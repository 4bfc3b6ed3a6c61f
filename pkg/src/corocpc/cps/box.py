"""Boxing: address-taken locals of coroutine functions move to heap cells."""
from __future__ import annotations

from ..lang import ast as A
from ..lang.typecheck import TypedProgram, typecheck
from .util import NameSupply, clone, coroutine_functions, map_expr, map_stmt_exprs


def uniquify(f: A.Function, names: NameSupply) -> None:
    """Rename locals so that every variable name in ``f`` is declared once.

    The first declaration of a name keeps it; later ones (shadowing or
    sibling scopes) get fresh names.  Globals are never renamed.
    """
    taken = set(f.param_names)

    def rename_expr(e: A.Expr, scopes: list) -> A.Expr:
        def fn(x):
            if isinstance(x, A.Var):
                for sc in reversed(scopes):
                    if x.name in sc:
                        x.name = sc[x.name]
                        break
            return x

        return map_expr(e, fn)

    def block(stmts: list, scopes: list):
        scopes = scopes + [{}]
        for s in stmts:
            stmt(s, scopes)

    def stmt(s, scopes):
        if isinstance(s, A.VarDecl):
            if s.init is not None:
                s.init = rename_expr(s.init, scopes)
            new = s.name if s.name not in taken else names.fresh(f.name)
            taken.add(new)
            scopes[-1][s.name] = new
            s.name = new
        elif isinstance(s, A.Assign):
            s.value = rename_expr(s.value, scopes)
            s.target = rename_expr(s.target, scopes)
        elif isinstance(s, (A.If, A.While)):
            s.cond = rename_expr(s.cond, scopes)
            if isinstance(s, A.If):
                block(s.then.stmts, scopes)
                if s.else_ is not None:
                    block(s.else_.stmts, scopes)
            else:
                block(s.body.stmts, scopes)
        elif isinstance(s, A.Return) and s.value is not None:
            s.value = rename_expr(s.value, scopes)
        elif isinstance(s, A.ExprStmt):
            s.expr = rename_expr(s.expr, scopes)
        elif isinstance(s, A.Block):
            block(s.stmts, scopes)

    base = [{n: n for n in f.param_names}]
    for s in f.body.stmts:
        stmt(s, base)


def address_taken(f: A.Function) -> list:
    """Locals and parameters of ``f`` whose address is taken, in declaration order."""
    taken = set()
    for e in A.walk_exprs(f.body, into_fundefs=False):
        if isinstance(e, A.AddrOf) and isinstance(e.operand, A.Var) and e.operand.scope in ("local", "param"):
            taken.add(e.operand.name)
    order = list(f.param_names) + [s.name for s in A.walk_stmts(f.body, False) if isinstance(s, A.VarDecl)]
    return [n for n in order if n in taken]


def box_function(f: A.Function, names: NameSupply) -> None:
    uniquify(f, names)
    boxed = address_taken(f)
    if not boxed:
        return
    box = {x: names.named(f.name, x) for x in boxed}
    cells = set(box.values())

    def deref(b, pos):
        return A.Deref(A.Var(b, pos=pos, ty=A.INTPTR, scope="local"), pos=pos, ty=A.INT)

    def fn(e):
        if isinstance(e, A.Var) and e.name in box and e.scope in ("local", "param"):
            return deref(box[e.name], e.pos)
        if isinstance(e, A.AddrOf) and isinstance(e.operand, A.Deref):
            inner = e.operand.operand
            if isinstance(inner, A.Var) and inner.name in cells:
                return inner
        return e

    map_stmt_exprs(f.body, fn)

    def rewrite(stmts: list) -> list:
        out = []
        for s in stmts:
            if isinstance(s, A.VarDecl) and s.name in box:
                init = s.init if s.init is not None else A.IntLit(0, ty=A.INT)
                out.append(A.Assign(deref(box[s.name], s.pos), init, pos=s.pos))
                continue
            if isinstance(s, A.If):
                s.then.stmts = rewrite(s.then.stmts)
                if s.else_ is not None:
                    s.else_.stmts = rewrite(s.else_.stmts)
            elif isinstance(s, A.While):
                s.body.stmts = rewrite(s.body.stmts)
            elif isinstance(s, A.Block):
                s.stmts = rewrite(s.stmts)
            out.append(s)
        return out

    prologue = []
    for x in boxed:
        alloc = A.Call(A.FunRef("box_alloc", ty=None), [], pos=f.pos)
        prologue.append(A.VarDecl(box[x], A.INTPTR, alloc, pos=f.pos))
    for x in boxed:
        if x in f.param_names:
            prologue.append(A.Assign(deref(box[x], f.pos), A.Var(x, pos=f.pos, scope="param", ty=A.INT), pos=f.pos))
    f.body.stmts = prologue + rewrite(f.body.stmts)


def box_variables(tp: TypedProgram) -> TypedProgram:
    p = clone(tp.program)
    names = NameSupply(p)
    for f in coroutine_functions(p):
        box_function(f, names)
    return typecheck(p)
