"""Compiling functions to flat instruction lists.

Each instruction is a closure taking the activation frame (a Python list)
and returning the index of the next instruction, or -1 after a return.
Slot 0 of a frame holds the return value.  An instruction whose
expressions contain a suspending call is a generator function; only
coroutine bodies of the direct engine contain those.

Values: ints are Python ints, pointers are ``(container, index)`` pairs,
function values are function names, the null value is 0.
"""
from __future__ import annotations

from ..lang import ast as A
from ..lang.typecheck import TypedProgram

DEFAULT_FUEL = 10**6
END = -1


class FuelExhausted(Exception):
    pass


class RuntimeFault(Exception):
    """A run-time error of the interpreted program; ``kind`` names it."""

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


def _div(a, b):
    if b == 0:
        raise RuntimeFault("DivisionByZero", "division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _mod(a, b):
    return a - b * _div(a, b)


BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "%": _mod,
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b),
    ">=": lambda a, b: int(a >= b),
}


def _load(p):
    if p == 0:
        raise RuntimeFault("NullDeref", "dereference of a null pointer")
    return p[0][p[1]]


def suspends(call: A.Call) -> bool:
    t = call.callee.ty
    return isinstance(t, A.FunType) and t.ann.suspends


def has_suspend(e) -> bool:
    return e is not None and any(isinstance(x, A.Call) and suspends(x) for x in A.walk_expr(e))


def _lift(fn):
    """A plain closure as a generator closure."""

    def g(fr):
        return fn(fr)
        yield  # pragma: no cover

    return g


class Code:
    __slots__ = ("name", "instrs", "gen", "nslots", "nparams", "coroutine")

    def __init__(self, name, instrs, gen, nslots, nparams, coroutine):
        self.name = name
        self.instrs = instrs
        self.gen = gen
        self.nslots = nslots
        self.nparams = nparams
        self.coroutine = coroutine

    def frame(self, args) -> list:
        fr = [0] * self.nslots
        fr[1 : 1 + len(args)] = args
        return fr


class Machine:
    """Shared state and compiler of both engines.

    Subclasses supply ``compile_call`` and the builtin table, and define
    the coroutine operations used by the scheduler.
    """

    gen_mode = False  # compile coroutine bodies as generators

    def __init__(self, tp: TypedProgram, fuel: int = DEFAULT_FUEL):
        self.tp = tp
        self.program = tp.program
        self.global_slot = {g.name: i for i, g in enumerate(self.program.globals)}
        self.globals = [0] * len(self.global_slot)
        self.codes: dict = {}
        for f in self.program.defined_functions():
            self.codes[f.name] = _FnCompiler(self, f).compile()
        self.global_inits = [(self.global_slot[g.name], self.const(g.init)) for g in self.program.globals if g.init is not None]
        self.fuel = fuel
        self.trace = None

    # -- per-run state -------------------------------------------------------

    def reset(self, fuel: int):
        from .trace import Trace

        self.fuel = fuel
        self.trace = Trace()
        self.globals[:] = [0] * len(self.globals)
        for slot, fn in self.global_inits:
            self.globals[slot] = fn([])

    def const(self, e):
        fn, _ = _FnCompiler(self, None).expr(e)
        return fn

    def tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("step budget exhausted")

    def run_plain(self, code: Code, fr: list):
        ins = code.instrs
        pc = 0
        while pc >= 0:
            self.fuel -= 1
            if self.fuel < 0:
                raise FuelExhausted("step budget exhausted")
            pc = ins[pc](fr)
        return fr[0]

    def run_gen(self, code: Code, fr: list):
        ins, gen = code.instrs, code.gen
        pc = 0
        while pc >= 0:
            self.fuel -= 1
            if self.fuel < 0:
                raise FuelExhausted("step budget exhausted")
            if gen[pc]:
                pc = yield from ins[pc](fr)
            else:
                pc = ins[pc](fr)
        return fr[0]

    def print_value(self, v):
        self.trace.add("PRINT", v)

    def call_main(self):
        code = self.codes.get("main")
        if code is None:
            raise RuntimeFault("NoMain", "program defines no main function")
        self.run_plain(code, code.frame([]))

    # -- hooks -----------------------------------------------------------------

    def compile_call(self, e: A.Call, callee, args, gen: bool):  # pragma: no cover
        raise NotImplementedError

    def compile_special(self, e: A.Expr, fc: "_FnCompiler"):
        raise RuntimeFault("Unsupported", f"{type(e).__name__} is not executable here")


class _FnCompiler:
    def __init__(self, m: Machine, f):
        self.m = m
        self.f = f
        self.gen_fn = bool(f is not None and m.gen_mode and f.is_coroutine)
        self.instrs: list = []
        self.gen: list = []
        self.scopes: list = [{}]
        self.nslots = 1
        self.labels: dict = {}
        self.gotos: list = []

    # -- slots -----------------------------------------------------------------

    def declare(self, name: str) -> int:
        slot = self.nslots
        self.nslots += 1
        self.scopes[-1][name] = slot
        return slot

    def slot_of(self, name: str):
        for sc in reversed(self.scopes):
            if name in sc:
                return sc[name]
        return None

    # -- emission ----------------------------------------------------------------

    def here(self) -> int:
        return len(self.instrs)

    def emit(self, fn, gen=False) -> int:
        self.instrs.append(fn)
        self.gen.append(gen)
        return len(self.instrs) - 1

    def compile(self) -> Code:
        f = self.f
        for n in f.param_names:
            self.declare(n)
        self.block(f.body.stmts)

        def fall(fr):
            return END

        self.emit(fall)
        for target, label in self.gotos:
            target[0] = self.labels[label]
        return Code(f.name, self.instrs, self.gen, self.nslots, len(f.param_names), f.is_coroutine)

    def block(self, stmts):
        self.scopes.append({})
        for s in stmts:
            self.stmt(s)
        self.scopes.pop()

    def stmt(self, s):
        if isinstance(s, A.Block):
            self.block(s.stmts)
        elif isinstance(s, A.VarDecl):
            self.vardecl(s)
        elif isinstance(s, A.Assign):
            self.assign(s)
        elif isinstance(s, A.ExprStmt):
            fn, g = self.expr(s.expr)
            nxt = self.here() + 1
            if g:
                def ins(fr, fn=fn):
                    yield from fn(fr)
                    return nxt
            else:
                def ins(fr, fn=fn):
                    fn(fr)
                    return nxt
            self.emit(ins, g)
        elif isinstance(s, A.Return):
            if s.value is None:
                self.emit(lambda fr: END)
            else:
                fn, g = self.expr(s.value)
                if g:
                    def ins(fr, fn=fn):
                        fr[0] = yield from fn(fr)
                        return END
                else:
                    def ins(fr, fn=fn):
                        fr[0] = fn(fr)
                        return END
                self.emit(ins, g)
        elif isinstance(s, A.If):
            self.if_(s)
        elif isinstance(s, A.While):
            self.while_(s)
        elif isinstance(s, A.Label):
            self.labels[s.name] = self.here()
        elif isinstance(s, A.Goto):
            target = [None]
            self.gotos.append((target, s.label))
            self.emit(lambda fr, t=target: t[0])
        elif isinstance(s, A.FunDef):
            raise RuntimeFault("Unsupported", "nested functions are not executable; lift the program first")
        else:
            raise AssertionError(f"unexpected statement {s!r}")

    def vardecl(self, s):
        if s.init is None:
            slot = self.declare(s.name)
            nxt = self.here() + 1

            def ins(fr):
                fr[slot] = 0
                return nxt

            self.emit(ins)
            return
        fn, g = self.expr(s.init)
        slot = self.declare(s.name)
        nxt = self.here() + 1
        if g:
            def ins(fr):
                fr[slot] = yield from fn(fr)
                return nxt
        else:
            def ins(fr):
                fr[slot] = fn(fr)
                return nxt
        self.emit(ins, g)

    def assign(self, s):
        val, vg = self.expr(s.value)
        t = s.target
        nxt = self.here() + 1
        if isinstance(t, A.Var):
            cont, idx = self.var_home(t)
            if cont is None:
                if vg:
                    def ins(fr):
                        fr[idx] = yield from val(fr)
                        return nxt
                else:
                    def ins(fr):
                        fr[idx] = val(fr)
                        return nxt
            else:
                if vg:
                    def ins(fr):
                        cont[idx] = yield from val(fr)
                        return nxt
                else:
                    def ins(fr):
                        cont[idx] = val(fr)
                        return nxt
            self.emit(ins, vg)
            return
        ptr, pg = self.expr(t.operand)
        if vg or pg:
            val, ptr = self.as_gen(val, vg), self.as_gen(ptr, pg)

            def ins(fr):
                v = yield from val(fr)
                p = yield from ptr(fr)
                if p == 0:
                    raise RuntimeFault("NullDeref", "store through a null pointer")
                p[0][p[1]] = v
                return nxt

            self.emit(ins, True)
        else:
            def ins(fr):
                v = val(fr)
                p = ptr(fr)
                if p == 0:
                    raise RuntimeFault("NullDeref", "store through a null pointer")
                p[0][p[1]] = v
                return nxt

            self.emit(ins)

    def cond_jump(self, e, target):
        """Emit: if ``e`` is false jump to ``target[0]``."""
        fn, g = self.expr(e)
        nxt = self.here() + 1
        if g:
            def ins(fr):
                return nxt if (yield from fn(fr)) else target[0]
        else:
            def ins(fr):
                return nxt if fn(fr) else target[0]
        self.emit(ins, g)

    def if_(self, s):
        other = [None]
        self.cond_jump(s.cond, other)
        self.block(s.then.stmts)
        if s.else_ is None:
            other[0] = self.here()
            return
        end = [None]
        self.emit(lambda fr: end[0])
        other[0] = self.here()
        self.block(s.else_.stmts)
        end[0] = self.here()

    def while_(self, s):
        top = self.here()
        end = [None]
        self.cond_jump(s.cond, end)
        self.block(s.body.stmts)
        self.emit(lambda fr: top)
        end[0] = self.here()

    # -- expressions ----------------------------------------------------------------

    def var_home(self, v: A.Var):
        """(container, index) of a variable; container None means the frame."""
        slot = self.slot_of(v.name)
        if slot is not None:
            return None, slot
        if v.name in self.m.global_slot:
            return self.m.globals, self.m.global_slot[v.name]
        raise RuntimeFault("UnknownIdentifier", f"unknown variable {v.name}")

    @staticmethod
    def as_gen(fn, g):
        return fn if g else _lift(fn)

    def seq(self, parts):
        """Generator closure evaluating ``parts`` left to right into a list."""
        parts = list(parts)

        def g(fr):
            vals = []
            for fn, isg in parts:
                if isg:
                    vals.append((yield from fn(fr)))
                else:
                    vals.append(fn(fr))
            return vals

        return g

    def expr(self, e):
        """(closure, is_generator) for ``e``."""
        if isinstance(e, A.IntLit):
            v = e.value
            return (lambda fr: v), False
        if isinstance(e, A.Var):
            cont, idx = self.var_home(e)
            if cont is None:
                return (lambda fr: fr[idx]), False
            return (lambda fr: cont[idx]), False
        if isinstance(e, A.FunRef):
            name = e.name
            return (lambda fr: name), False
        if isinstance(e, A.AddrOf):
            op = e.operand
            if isinstance(op, A.FunRef):
                name = op.name
                return (lambda fr: name), False
            cont, idx = self.var_home(op)
            if cont is None:
                return (lambda fr: (fr, idx)), False
            ref = (cont, idx)
            return (lambda fr: ref), False
        if isinstance(e, A.Deref):
            fn, g = self.expr(e.operand)
            if isinstance(e.ty, A.FunType):
                return fn, g
            if g:
                def gd(fr):
                    return _load((yield from fn(fr)))
                return gd, True
            return (lambda fr: _load(fn(fr))), False
        if isinstance(e, A.Cast):
            return self.expr(e.operand)
        if isinstance(e, A.UnOp):
            fn, g = self.expr(e.operand)
            if e.op == "-":
                op = lambda v: -v
            else:
                op = lambda v: int(v == 0)
            if g:
                def gu(fr):
                    return op((yield from fn(fr)))
                return gu, True
            return (lambda fr: op(fn(fr))), False
        if isinstance(e, A.BinOp):
            return self.binop(e)
        if isinstance(e, A.Call):
            callee = self.expr(e.callee)
            args = [self.expr(a) for a in e.args]
            gen = callee[1] or any(g for _, g in args) or suspends(e)
            if gen and not self.gen_fn:
                gen = False
            return self.m.compile_call(e, callee, args, gen, self), gen
        return self.m.compile_special(e, self)

    def binop(self, e):
        l, lg = self.expr(e.left)
        r, rg = self.expr(e.right)
        if e.op in ("&&", "||"):
            is_and = e.op == "&&"
            if lg or rg:
                l, r = self.as_gen(l, lg), self.as_gen(r, rg)

                def g(fr):
                    a = yield from l(fr)
                    if bool(a) != is_and:
                        return int(not is_and)
                    return int(bool((yield from r(fr))))

                return g, True
            if is_and:
                return (lambda fr: int(bool(l(fr)) and bool(r(fr)))), False
            return (lambda fr: int(bool(l(fr)) or bool(r(fr)))), False
        op = BINOPS[e.op]
        if lg or rg:
            l, r = self.as_gen(l, lg), self.as_gen(r, rg)

            def g(fr):
                a = yield from l(fr)
                b = yield from r(fr)
                return op(a, b)

            return g, True
        return (lambda fr: op(l(fr), r(fr))), False
