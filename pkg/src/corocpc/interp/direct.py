"""Direct-style reference interpreter of untranslated programs.

Each coroutine is a chain of Python generators, one per coroutine-function
activation, so its interpreter stack lives apart from the caller's and a
yield suspends exactly that stack.
"""
from __future__ import annotations

from ..lang import ast as A
from ..lang.prelude import YIELDING
from ..lang.typecheck import TypedProgram
from .machine import DEFAULT_FUEL, Machine, RuntimeFault

CREATED, RUNNING, YIELDED, TERMINATED = "Created", "Running", "Yielded", "Terminated"


class _Coro:
    __slots__ = ("ordinal", "entry", "gen", "state")

    def __init__(self, ordinal, entry):
        self.ordinal = ordinal
        self.entry = entry
        self.gen = None
        self.state = CREATED


class DirectMachine(Machine):
    gen_mode = True

    def __init__(self, tp: TypedProgram, fuel: int = DEFAULT_FUEL):
        if tp.cps:
            raise ValueError("the direct engine runs untranslated programs")
        self.builtins = {
            "print": self._print,
            "co_create": self._create,
            "co_enter": self._enter,
            "in_coroutine": self._in_coroutine,
            "co_self": self._self,
            "box_alloc": lambda: ([0], 0),
        }
        super().__init__(tp, fuel)

    def reset(self, fuel: int):
        super().reset(fuel)
        self.coros: list = []
        self.active: list = []  # coroutines currently running, innermost last

    # -- builtins -------------------------------------------------------------

    def _print(self, v):
        self.print_value(v)
        return 0

    def _create(self, entry):
        code = self.codes.get(entry) if isinstance(entry, str) else None
        if code is None or not code.coroutine:
            raise RuntimeFault("BadEntry", f"co_create needs a defined coroutine function, got {entry!r}")
        c = _Coro(len(self.coros) + 1, entry)
        self.coros.append(c)
        return c.ordinal

    def _in_coroutine(self):
        return int(bool(self.active))

    def _self(self):
        if not self.active:
            raise RuntimeFault("SelfOutsideCoroutine", "co_self called outside coroutine context")
        return self.active[-1].ordinal

    def _enter(self, h, arg):
        if not isinstance(h, int) or not 1 <= h <= len(self.coros):
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
        if name == 0:
            raise RuntimeFault("NullCall", "call through a null function value")
        if name in YIELDING:
            yield name
            return 0
        code = self.codes.get(name)
        if code is None:
            raise RuntimeFault("UndefinedFunction", f"{name} has no definition")
        if not code.coroutine:
            raise RuntimeFault("ConventionFault", f"native function {name} called as a coroutine")
        return (yield from self.run_gen(code, code.frame(args)))

    def compile_call(self, e: A.Call, callee, args, gen: bool, fc):
        parts = [callee, *args]
        if not gen:
            cal = callee[0]
            fns = [a for a, _ in args]
            if e.callee.ty.ann.suspends:
                def illegal(fr):
                    raise RuntimeFault("SuspendOutsideCoroutine", "suspending call from a native function")
                return illegal
            direct = A.direct_callee(e)
            if direct is not None and direct in self.builtins:
                b = self.builtins[direct]
                return lambda fr: b(*[a(fr) for a in fns])
            call = self.call_native
            return lambda fr: call(cal(fr), [a(fr) for a in fns])
        seq = fc.seq(parts)
        if e.callee.ty.ann.suspends:
            susp = self.call_suspending

            def g(fr):
                vals = yield from seq(fr)
                return (yield from susp(vals[0], vals[1:]))

            return g
        call = self.call_native

        def g2(fr):
            vals = yield from seq(fr)
            return call(vals[0], vals[1:])

        return g2

    # -- coroutine operations used by the scheduler --------------------------------

    def live(self) -> list:
        return [c.ordinal for c in self.coros if c.state in (CREATED, YIELDED)]

    def created(self) -> int:
        return len(self.coros)

    def enter(self, h: int, arg=0):
        c = self.coros[h - 1]
        if c.state == RUNNING:
            raise RuntimeFault("EnterRunning", f"coroutine {h} is already running")
        if c.state == TERMINATED:
            raise RuntimeFault("EnterTerminated", f"coroutine {h} has terminated")
        if c.state == CREATED:
            code = self.codes[c.entry]
            c.gen = self.run_gen(code, code.frame([arg]))
        c.state = RUNNING
        self.trace.add("ENTER", h)
        self.active.append(c)
        try:
            next(c.gen)
        except StopIteration:
            c.state = TERMINATED
            c.gen = None
            self.trace.add("TERM", h)
        else:
            c.state = YIELDED
            self.trace.add("YIELD", h)
        finally:
            self.active.pop()
