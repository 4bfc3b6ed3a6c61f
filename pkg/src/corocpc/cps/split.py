"""Splitting: labelled blocks of a normalized coroutine function become nested functions.

A block starts at each label that some ``goto`` targets and after each
suspending call that is not already in tail position.  Jumps become tail
calls followed by ``return``; the entry block stays inline in the outer
function.  Top-level locals are declared before the nested functions so
that every block sees them.
"""
from __future__ import annotations

from ..lang import ast as A
from ..lang.typecheck import TypedProgram, typecheck
from .util import RESERVED_PREFIX, NameSupply, clone, coroutine_functions, is_suspending_call, tail_call


def suspending_stmt(s: A.Stmt) -> bool:
    """``f(a);``, ``x = f(a);`` or ``int x = f(a);`` with ``f`` suspending."""
    if isinstance(s, A.ExprStmt):
        return is_suspending_call(s.expr)
    if isinstance(s, A.Assign):
        return is_suspending_call(s.value)
    if isinstance(s, A.VarDecl):
        return s.init is not None and is_suspending_call(s.init)
    return False


class _Splitter:
    def __init__(self, f: A.Function, names: NameSupply):
        self.f = f
        self.names = names
        self.ret = f.ret
        self.ptype = A.FunType((), f.ret, f.annotation)

    def jump(self, target: str, pos) -> list:
        return tail_call(target, self.ptype, [], self.ret, pos)

    def rewrite_gotos(self, stmts: list, label_fn: dict) -> list:
        out = []
        for s in stmts:
            if isinstance(s, A.Goto):
                out.extend(self.jump(label_fn[s.label], s.pos))
                break
            if isinstance(s, A.If):
                s.then.stmts = self.rewrite_gotos(s.then.stmts, label_fn)
                if s.else_ is not None:
                    s.else_.stmts = self.rewrite_gotos(s.else_.stmts, label_fn)
            elif isinstance(s, A.Block):
                s.stmts = self.rewrite_gotos(s.stmts, label_fn)
            out.append(s)
            if isinstance(s, A.Return):
                break
        return out

    def partition(self, stmts: list, targets: set, label_fn: dict) -> list:
        """Cut ``stmts`` into (function name or None for the entry, statements) blocks."""
        f = self.f
        blocks = [(None, [])]
        cur = blocks[0][1]
        dead = False
        i = 0
        n = len(stmts)
        while i < n:
            s = stmts[i]
            nxt = stmts[i + 1] if i + 1 < n else None
            i += 1
            if isinstance(s, A.Label):
                if s.name in targets:
                    if not dead:
                        cur.extend(self.jump(label_fn[s.name], s.pos))
                    blocks.append((label_fn[s.name], []))
                    cur = blocks[-1][1]
                    dead = False
                continue
            if dead:
                continue
            if isinstance(s, A.Goto):
                cur.extend(self.jump(label_fn[s.label], s.pos))
                dead = True
            elif isinstance(s, A.Return):
                cur.append(s)
                dead = True
            elif suspending_stmt(s):
                cur.append(s)
                dead = True
                if isinstance(s, A.ExprStmt) and self.ret == A.VOID and (nxt is None or isinstance(nxt, A.Return)):
                    # already a tail call
                    cur.append(A.Return(None, pos=s.pos))
                    if nxt is not None:
                        i += 1
                elif isinstance(nxt, A.Goto):
                    cur.extend(self.jump(label_fn[nxt.label], nxt.pos))
                    i += 1
                elif isinstance(nxt, A.Label) and nxt.name in targets:
                    cur.extend(self.jump(label_fn[nxt.name], nxt.pos))
                else:
                    name = self.names.fresh(f.name)
                    cur.extend(self.jump(name, s.pos))
                    blocks.append((name, []))
                    cur = blocks[-1][1]
                    dead = False
            elif isinstance(s, A.If):
                cur.extend(self.rewrite_gotos([s], label_fn))
            else:
                cur.append(s)
        if not dead:
            cur.append(A.Return(None, pos=f.pos))
        return blocks

    def run(self):
        f = self.f
        body = f.body.stmts
        targets = {g.label for s in body for g in A.walk_stmts(s, False) if isinstance(g, A.Goto)}
        label_fn = {}
        for s in body:
            if isinstance(s, A.Label) and s.name in targets:
                if s.name.startswith(RESERVED_PREFIX):
                    label_fn[s.name] = s.name
                else:
                    label_fn[s.name] = self.names.named(f.name, s.name)

        decls = []
        stmts = []
        for s in body:
            if isinstance(s, A.VarDecl):
                decls.append(A.VarDecl(s.name, s.type, None, pos=s.pos))
                init = s.init if s.init is not None else A.IntLit(0, ty=A.INT, pos=s.pos)
                stmts.append(A.Assign(A.Var(s.name, pos=s.pos, ty=s.type, scope="local"), init, pos=s.pos))
            else:
                stmts.append(s)

        blocks = self.partition(stmts, targets, label_fn)
        if len(blocks) == 1:
            # nothing to split: keep declarations where they were
            f.body.stmts = self.partition(body, targets, label_fn)[0][1]
            return
        nested = []
        for name, stmts_ in blocks[1:]:
            fn = A.Function(name, self.ptype, [], A.Block(stmts_, pos=f.pos), pos=f.pos)
            nested.append(A.FunDef(fn, pos=f.pos))
        f.body.stmts = decls + nested + blocks[0][1]


def split_function(f: A.Function, names: NameSupply) -> A.Function:
    _Splitter(f, names).run()
    return f


def split(tp: TypedProgram) -> TypedProgram:
    p = clone(tp.program)
    names = NameSupply(p)
    for f in coroutine_functions(p):
        split_function(f, names)
    return typecheck(p)
