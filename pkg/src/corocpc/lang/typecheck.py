"""Type checking.

Every expression gets its ``ty`` set and every variable its ``scope``.
Calling conventions are part of function types, but a value whose type
differs from its destination only by annotation is accepted here: the
annotation checker reports those with call-graph context.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import ast as A
from .errors import TypeCheckFailed, TypeError_
from .prelude import builtin_type, builtin_names


@dataclass
class TypedProgram:
    program: A.Program
    functions: dict = field(default_factory=dict)  # name -> FunType (incl. builtins)
    globals: dict = field(default_factory=dict)  # name -> Type
    # function name -> {variable name -> Type}, params and locals (nested included)
    variables: dict = field(default_factory=dict)

    @property
    def cps(self) -> bool:
        return self.program.cps

    def fun_type(self, name: str):
        return self.functions.get(name)


def is_null(e: A.Expr) -> bool:
    return isinstance(e, A.IntLit) and e.value == 0


def assignable(dest: A.Type, src: A.Expr) -> bool:
    if src.ty is None:
        return True  # error already reported
    if is_null(src) and isinstance(dest, (A.PtrType, A.FunType)):
        return True
    return dest.same_base(src.ty)


class _Checker:
    def __init__(self, program: A.Program):
        self.p = program
        self.errors: list = []
        self.functions: dict = {}
        self.globals: dict = {}
        self.variables: dict = {}

    def err(self, kind: str, msg: str, pos):
        self.errors.append(TypeError_(kind, msg, pos))

    def run(self) -> TypedProgram:
        cps = self.p.cps
        for name in builtin_names(cps):
            self.functions[name] = builtin_type(name, cps)
        seen = {}
        for d in self.p.decls:
            if isinstance(d, A.GlobalDecl):
                if d.type == A.VOID:
                    self.err("VoidVariable", f"{d.name} has type void", d.pos)
                self.globals[d.name] = d.type
                continue
            bt = builtin_type(d.name, cps)
            if bt is not None:
                if d.is_defined:
                    self.err("BuiltinRedefinition", f"{d.name} is a runtime primitive", d.pos)
                elif not bt.compatible(d.type):
                    self.err("ConventionMismatch" if bt.same_base(d.type) else "PrototypeMismatch",
                             f"declaration of {d.name} does not match the primitive", d.pos)
                continue
            if d.is_defined and d.type.ann.need_cont:
                self.err("NeedContOnDefinition", f"{d.name}: needcont is reserved for runtime primitives", d.pos)
            if d.name in seen:
                other = seen[d.name]
                if not other.type.same_base(d.type):
                    self.err("PrototypeMismatch", f"{d.name} declared with a different type", d.pos)
                elif other.type.ann != d.type.ann:
                    self.err("ConventionMismatch", f"{d.name} declared with a different calling convention", d.pos)
            seen[d.name] = d
            if d.is_defined or d.name not in self.functions:
                self.functions[d.name] = d.type
        for d in self.p.decls:
            if isinstance(d, A.GlobalDecl):
                if d.init is not None:
                    self.expr(d.init, [], {})
                    if any(isinstance(e, A.Call) for e in A.walk_expr(d.init)):
                        self.err("GlobalInitNotConstant", f"initializer of {d.name} calls a function", d.pos)
                    elif not assignable(d.type, d.init):
                        self.mismatch(d.type, d.init, d.pos)
            elif d.is_defined:
                self.function(d, [], {}, d.name)
        if self.errors:
            raise TypeCheckFailed(self.errors)
        return TypedProgram(self.p, self.functions, self.globals, self.variables)

    def mismatch(self, dest, src, pos):
        if src.ty == A.VOID:
            self.err("VoidValueUse", "void value used", pos)
        else:
            self.err("TypeMismatch", f"expected {dest}, got {src.ty}", pos)

    def function(self, f: A.Function, scopes: list, funs: dict, owner: str):
        table = self.variables.setdefault(owner, {})
        params = {}
        for n, t in f.params:
            if t == A.VOID:
                self.err("VoidVariable", f"parameter {n} has type void", f.pos)
            params[n] = (t, "param")
            table[n] = t
        nested = dict(funs)
        for s in f.body.stmts:
            if isinstance(s, A.FunDef):
                nested[s.func.name] = s.func.type
        self.block(f.body, scopes + [params], nested, owner, f.ret, fresh=False)

    def block(self, b: A.Block, scopes, funs, owner, ret, fresh=True):
        if fresh:
            scopes = scopes + [{}]
        for s in b.stmts:
            self.stmt(s, scopes, funs, owner, ret)

    def stmt(self, s, scopes, funs, owner, ret):
        if isinstance(s, A.VarDecl):
            if s.type == A.VOID:
                self.err("VoidVariable", f"{s.name} has type void", s.pos)
            if s.init is not None:
                self.expr(s.init, scopes, funs)
                if not assignable(s.type, s.init):
                    self.mismatch(s.type, s.init, s.pos)
            scopes[-1][s.name] = (s.type, "local")
            self.variables.setdefault(owner, {})[s.name] = s.type
        elif isinstance(s, A.Assign):
            self.expr(s.value, scopes, funs)
            self.expr(s.target, scopes, funs)
            t = s.target
            if isinstance(t, A.Var) or isinstance(t, A.Deref) and t.operand.ty == A.INTPTR:
                if t.ty is not None and not assignable(t.ty, s.value):
                    self.mismatch(t.ty, s.value, s.pos)
            else:
                self.err("BadAssignTarget", "cannot assign to this expression", s.pos)
        elif isinstance(s, (A.If, A.While)):
            self.cond(s.cond, scopes, funs, s.pos)
            if isinstance(s, A.If):
                self.block(s.then, scopes, funs, owner, ret)
                if s.else_ is not None:
                    self.block(s.else_, scopes, funs, owner, ret)
            else:
                self.block(s.body, scopes, funs, owner, ret)
        elif isinstance(s, A.Return):
            if s.value is not None:
                self.expr(s.value, scopes, funs)
                if ret == A.VOID:
                    self.err("ReturnValueInVoid", "void function returns a value", s.pos)
                elif not assignable(ret, s.value):
                    self.mismatch(ret, s.value, s.pos)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr, scopes, funs)
        elif isinstance(s, A.Block):
            self.block(s, scopes, funs, owner, ret)
        elif isinstance(s, A.FunDef):
            f = s.func
            if f.type.ann.need_cont:
                self.err("NeedContOnDefinition", f"{f.name}: needcont is reserved for runtime primitives", f.pos)
            self.function(f, scopes, funs, owner)

    def cond(self, e, scopes, funs, pos):
        self.expr(e, scopes, funs)
        if e.ty is not None and e.ty != A.INT:
            self.mismatch(A.INT, e, pos)

    def lookup(self, name, scopes):
        for sc in reversed(scopes):
            if name in sc:
                return sc[name]
        if name in self.globals:
            return self.globals[name], "global"
        return None

    def int_operand(self, e, pos):
        if e.ty is not None and e.ty != A.INT:
            self.mismatch(A.INT, e, pos)

    def expr(self, e: A.Expr, scopes, funs) -> None:
        pos = e.pos
        if isinstance(e, A.IntLit):
            e.ty = A.INT
        elif isinstance(e, A.Var):
            found = self.lookup(e.name, scopes)
            if found is None:
                self.err("UnknownIdentifier", f"unknown identifier {e.name}", pos)
            else:
                e.ty, e.scope = found
        elif isinstance(e, A.FunRef):
            t = funs.get(e.name) or self.functions.get(e.name)
            if t is None:
                self.err("UnknownIdentifier", f"unknown function {e.name}", pos)
            e.ty = t
        elif isinstance(e, A.AddrOf):
            self.expr(e.operand, scopes, funs)
            op = e.operand
            if isinstance(op, A.FunRef):
                e.ty = op.ty
            elif isinstance(op, A.Var) and op.ty is not None:
                if op.ty == A.INT:
                    e.ty = A.INTPTR
                else:
                    self.err("AddressOfNonInt", f"cannot take the address of {op.name}", pos)
        elif isinstance(e, A.Deref):
            self.expr(e.operand, scopes, funs)
            t = e.operand.ty
            if t == A.INTPTR:
                e.ty = A.INT
            elif isinstance(t, A.FunType):
                e.ty = t
            elif t is not None:
                self.err("DerefNonPointer", "dereference of a non-pointer", pos)
        elif isinstance(e, A.Call):
            self.expr(e.callee, scopes, funs)
            for a in e.args:
                self.expr(a, scopes, funs)
            ft = e.callee.ty
            if ft is None:
                return
            if not isinstance(ft, A.FunType):
                self.err("CallOfNonFunction", "called object is not a function", pos)
                return
            if len(ft.params) != len(e.args):
                self.err("ArityMismatch", f"expected {len(ft.params)} arguments, got {len(e.args)}", pos)
            else:
                for pt, a in zip(ft.params, e.args):
                    if isinstance(a, A.RetSlot):
                        self.err("MisplacedRetSlot", "__cpc_retval outside push", a.pos)
                    elif not assignable(pt, a):
                        self.mismatch(pt, a, a.pos)
            e.ty = ft.ret
        elif isinstance(e, A.BinOp):
            self.expr(e.left, scopes, funs)
            self.expr(e.right, scopes, funs)
            self.int_operand(e.left, pos)
            self.int_operand(e.right, pos)
            e.ty = A.INT
        elif isinstance(e, A.UnOp):
            self.expr(e.operand, scopes, funs)
            self.int_operand(e.operand, pos)
            e.ty = A.INT
        elif isinstance(e, A.Cast):
            self.expr(e.operand, scopes, funs)
            src = e.operand.ty
            if src is not None and not (e.type.same_base(src) or is_null(e.operand) and isinstance(e.type, (A.PtrType, A.FunType))):
                self.err("BadCast", f"cannot cast {src} to {e.type}", pos)
            e.ty = e.type
        elif isinstance(e, A.Push):
            self.expr(e.fn, scopes, funs)
            self.expr(e.cont, scopes, funs)
            for a in e.args:
                if isinstance(a, A.RetSlot):
                    continue
                self.expr(a, scopes, funs)
            ft = e.fn.ty
            if ft is not None:
                if not (isinstance(ft, A.FunType) and ft.ann.is_coroutine and ft.params and ft.params[-1] == A.CONT):
                    self.err("BadPush", "push needs a CPS-converted coroutine function", pos)
                elif len(ft.params) - 1 != len(e.args):
                    self.err("ArityMismatch", f"push expected {len(ft.params) - 1} arguments, got {len(e.args)}", pos)
                else:
                    for pt, a in zip(ft.params, e.args):
                        if isinstance(a, A.RetSlot):
                            a.ty = pt
                        elif not assignable(pt, a):
                            self.mismatch(pt, a, a.pos)
            if e.cont.ty is not None and e.cont.ty != A.CONT:
                self.mismatch(A.CONT, e.cont, pos)
            e.ty = A.CONT
        elif isinstance(e, A.Invoke):
            self.expr(e.cont, scopes, funs)
            if e.value is not None:
                self.expr(e.value, scopes, funs)
                self.int_operand(e.value, pos)
            if e.cont.ty is not None and e.cont.ty != A.CONT:
                self.mismatch(A.CONT, e.cont, pos)
            e.ty = A.VOID
        elif isinstance(e, A.NullCont):
            e.ty = A.CONT
        elif isinstance(e, A.RetSlot):
            self.err("MisplacedRetSlot", "__cpc_retval outside push", pos)


def typecheck(program: A.Program) -> TypedProgram:
    """Type-check ``program`` in place; raises TypeCheckFailed listing every error."""
    return _Checker(program).run()
