"""Running translated programs on the continuation runtime."""
from __future__ import annotations

from ..lang import ast as A
from ..lang.prelude import YIELDING
from ..lang.typecheck import TypedProgram
from ..runtime import (
    DEFAULT_POOL_SIZE,
    EnterRunning,
    EnterTerminated,
    FunctionTable,
    Pool,
    Runtime,
    SelfOutsideCoroutine,
    TERMINATED,
    UnknownFunctionId,
    YieldOutsideCoroutine,
)
from .machine import DEFAULT_FUEL, Machine, RuntimeFault


class CpsMachine(Machine):
    """Plain execution of CPS code; coroutine functions run from the trampoline."""

    def __init__(self, tp: TypedProgram, fuel: int = DEFAULT_FUEL, pool_size: int = DEFAULT_POOL_SIZE, hard_cap=None):
        if not tp.cps:
            raise ValueError("the CPS engine runs translated programs")
        self.builtins = {
            "print": self._print,
            "co_create": self._create,
            "co_enter": self._enter,
            "in_coroutine": Runtime.in_coroutine,
            "co_self": self._self,
            "box_alloc": lambda: ([0], 0),
        }
        super().__init__(tp, fuel)
        self.pool_size = pool_size
        self.hard_cap = hard_cap
        self.table = FunctionTable()
        for name, code in self.codes.items():
            if code.coroutine:
                self.table.register(name, self._body(code))

    def _body(self, code):
        run = self.run_plain

        def body(k, *args):
            fr = code.frame(args)
            fr[code.nparams] = k
            run(code, fr)

        return body

    def reset(self, fuel: int):
        super().reset(fuel)
        self.runtime = Runtime(self.table, Pool(self.pool_size), hard_cap=self.hard_cap, listener=self._event)
        self.handles: dict = {}

    def _event(self, kind, co):
        self.trace.add(kind, co.ordinal)

    # -- builtins -------------------------------------------------------------

    def _print(self, v):
        self.print_value(v)
        return 0

    def fid(self, name) -> int:
        if name == 0:
            raise RuntimeFault("NullCall", "call through a null function value")
        fid = self.table.ids.get(name)
        if fid is None or name in YIELDING:
            if name in self.codes or name in self.builtins:
                raise RuntimeFault("ConventionFault", f"native function {name} called as a coroutine")
            raise RuntimeFault("UndefinedFunction", f"{name} has no definition")
        return fid

    def _create(self, entry):
        try:
            fid = self.fid(entry)
        except RuntimeFault:
            raise RuntimeFault("BadEntry", f"co_create needs a defined coroutine function, got {entry!r}") from None
        co = self.runtime.create(fid)
        self.handles[co.ordinal] = co
        return co.ordinal

    def _self(self, k):
        try:
            return self.runtime.self_of(k).ordinal
        except SelfOutsideCoroutine as ex:
            raise RuntimeFault("SelfOutsideCoroutine", str(ex)) from None

    def _enter(self, h, arg):
        if not isinstance(h, int) or h not in self.handles:
            raise RuntimeFault("BadHandle", f"no coroutine {h!r}")
        self.enter(h, arg)
        return 0

    # -- calls ----------------------------------------------------------------

    def call_native(self, name, args):
        if name == 0:
            raise RuntimeFault("NullCall", "call through a null function value")
        b = self.builtins.get(name)
        if b is not None:
            return b(*args)
        code = self.codes.get(name)
        if code is None:
            raise RuntimeFault("UndefinedFunction", f"{name} has no definition")
        if code.coroutine:
            raise RuntimeFault("ConventionFault", f"coroutine function {name} called as a native function")
        return self.run_plain(code, code.frame(args))

    def call_suspending(self, name, args):
        k = args[-1]
        if name in YIELDING:
            try:
                self.runtime.co_yield(k)
            except YieldOutsideCoroutine as ex:
                raise RuntimeFault("YieldOutsideCoroutine", str(ex)) from None
            return 0
        fid = self.fid(name)
        if k is None:
            raise RuntimeFault("SuspendOutsideCoroutine", "suspending call without a continuation")
        k.push(fid, args[:-1])
        return 0

    def compile_call(self, e: A.Call, callee, args, gen: bool, fc):
        cal = callee[0]
        fns = [a for a, _ in args]
        if e.callee.ty.ann.suspends:
            susp = self.call_suspending
            return lambda fr: susp(cal(fr), [a(fr) for a in fns])
        direct = A.direct_callee(e)
        if direct is not None and direct in self.builtins:
            b = self.builtins[direct]
            return lambda fr: b(*[a(fr) for a in fns])
        call = self.call_native
        return lambda fr: call(cal(fr), [a(fr) for a in fns])

    def compile_special(self, e, fc):
        if isinstance(e, A.NullCont):
            return (lambda fr: None), False
        if isinstance(e, A.Invoke):
            kf, _ = fc.expr(e.cont)
            if e.value is None:
                return (lambda fr: None), False
            vf, _ = fc.expr(e.value)

            def invoke(fr):
                v = vf(fr)
                kf(fr).set_return(v)

            return invoke, False
        if isinstance(e, A.Push):
            ff, _ = fc.expr(e.fn)
            kf, _ = fc.expr(e.cont)
            slot = None
            fns = []
            for i, a in enumerate(e.args):
                if isinstance(a, A.RetSlot):
                    slot = i
                    fns.append(lambda fr: 0)
                else:
                    fns.append(fc.expr(a)[0])
            fid = self.fid

            def push(fr):
                f = fid(ff(fr))
                vals = [a(fr) for a in fns]
                return kf(fr).push(f, vals, slot)

            return push, False
        return super().compile_special(e, fc)

    # -- coroutine operations used by the scheduler --------------------------------

    def _co(self, h):
        co = self.handles[h]
        return co if co.ordinal == h else None

    def live(self) -> list:
        out = []
        for h in sorted(self.handles):
            co = self._co(h)
            if co is not None and co.state != TERMINATED:
                out.append(h)
        return out

    def created(self) -> int:
        return self.runtime.stats.created

    def enter(self, h: int, arg=0):
        co = self._co(h)
        if co is None:
            raise RuntimeFault("EnterTerminated", f"coroutine {h} has terminated")
        try:
            self.runtime.enter(co, arg)
        except EnterRunning as ex:
            raise RuntimeFault("EnterRunning", str(ex)) from None
        except EnterTerminated as ex:
            raise RuntimeFault("EnterTerminated", str(ex)) from None
        except UnknownFunctionId as ex:
            raise RuntimeFault("UnknownFunctionId", str(ex)) from None
