"""Lambda lifting: free variables of nested functions become parameters, then the
nested functions float to top level."""
from __future__ import annotations

from ..lang import ast as A
from ..lang.typecheck import TypedProgram, typecheck
from .util import clone, map_stmt_exprs


def _declared(f: A.Function) -> set:
    names = set(f.param_names)
    for s in A.walk_stmts(f.body, into_fundefs=False):
        if isinstance(s, A.VarDecl):
            names.add(s.name)
    return names


def free_variables(f: A.Function) -> set:
    """Variables used in ``f`` that are neither its own nor global."""
    own = _declared(f)
    out = set()
    for e in A.walk_exprs(f.body, into_fundefs=False):
        if isinstance(e, A.Var) and e.scope in ("local", "param") and e.name not in own:
            out.add(e.name)
    return out


def _called(f: A.Function, names: set) -> set:
    return {e.name for e in A.walk_exprs(f.body, into_fundefs=False) if isinstance(e, A.FunRef) and e.name in names}


def lift_function(f: A.Function) -> list:
    """Lift the nested functions of ``f``; returns them as top-level functions."""
    nested = [s.func for s in f.body.stmts if isinstance(s, A.FunDef)]
    if not nested:
        return []
    order = list(f.param_names)
    types = dict(f.params)
    for s in f.body.stmts:
        if isinstance(s, A.VarDecl):
            order.append(s.name)
            types[s.name] = s.type
    outer = set(order)
    by_name = {g.name: g for g in nested}
    fv = {g.name: free_variables(g) & outer for g in nested}
    calls = {g.name: _called(g, set(by_name)) for g in nested}
    changed = True
    while changed:
        changed = False
        for g in nested:
            want = set(fv[g.name])
            for h in calls[g.name]:
                want |= fv[h]
            if want != fv[g.name]:
                fv[g.name] = want
                changed = True
    extra = {name: [v for v in order if v in fv[name]] for name in by_name}

    def add_args(e):
        if isinstance(e, A.Call) and isinstance(e.callee, A.FunRef) and e.callee.name in extra:
            e.args = e.args + [A.Var(v, pos=e.pos, scope="local", ty=types[v]) for v in extra[e.callee.name]]
        return e

    for g in nested:
        ps = extra[g.name]
        g.param_names = list(g.param_names) + ps
        g.type = A.FunType(g.type.params + tuple(types[v] for v in ps), g.type.ret, g.type.ann)
        map_stmt_exprs(g.body, add_args)
    f.body.stmts = [s for s in f.body.stmts if not isinstance(s, A.FunDef)]
    map_stmt_exprs(f.body, add_args)
    return nested


def lift(tp: TypedProgram) -> TypedProgram:
    p = clone(tp.program)
    decls = []
    for d in p.decls:
        if isinstance(d, A.Function) and d.body is not None:
            decls.extend(lift_function(d))
        decls.append(d)
    p.decls = decls
    return typecheck(p)


def program_free_variables(p: A.Program) -> dict:
    """Function name -> free variables, for every function (nested ones included)."""
    out = {}
    for d in p.functions:
        if d.body is None:
            continue
        stack = [d]
        while stack:
            f = stack.pop()
            out[f.name] = free_variables(f)
            stack.extend(s.func for s in A.walk_stmts(f.body, into_fundefs=False) if isinstance(s, A.FunDef))
    return out
