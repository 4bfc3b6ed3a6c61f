"""Checking the CPS-convertible form of split coroutine functions.

Every tail position must be one of:

* ``TailCallCps``: ``f(a); return;`` or ``return f(a);`` with ``f`` suspending;
* ``ExternCpsThenTailCall``: a suspending call (its result possibly stored in
  a local) immediately followed by such a tail call;
* ``PlainReturn``: a ``return`` with no suspending call before it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..lang import ast as A
from .util import has_suspending, is_suspending_call

TAIL_CALL = "TailCallCps"
EXTERN_THEN_TAIL = "ExternCpsThenTailCall"
PLAIN_RETURN = "PlainReturn"
SHAPES = (TAIL_CALL, EXTERN_THEN_TAIL, PLAIN_RETURN)


@dataclass
class CpsForm:
    tail_shape: dict = field(default_factory=dict)  # function -> shape of its final tail
    tails: list = field(default_factory=list)  # (function, shape) for every tail position
    violations: list = field(default_factory=list)  # (function, pos, reason)

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "CpsForm") -> "CpsForm":
        self.tail_shape.update(other.tail_shape)
        self.tails.extend(other.tails)
        self.violations.extend(other.violations)
        return self


def _plain_call(e) -> bool:
    return is_suspending_call(e) and not any(has_suspending(a) for a in [e.callee, *e.args])


def tail_call_at(stmts: list, i: int, ret: A.Type):
    """Length of the tail call starting at ``stmts[i]`` (0 if there is none)."""
    s = stmts[i]
    if isinstance(s, A.Return) and s.value is not None and _plain_call(s.value):
        return 1
    if (
        isinstance(s, A.ExprStmt)
        and _plain_call(s.expr)
        and i + 1 < len(stmts)
        and isinstance(stmts[i + 1], A.Return)
        and stmts[i + 1].value is None
        and ret == A.VOID
    ):
        return 2
    return 0


def _stores_result(s: A.Stmt) -> bool:
    if isinstance(s, A.ExprStmt):
        return _plain_call(s.expr)
    if isinstance(s, A.Assign):
        return isinstance(s.target, A.Var) and s.target.scope in ("local", "param") and _plain_call(s.value)
    return False


class _Verifier:
    def __init__(self, name: str, ret: A.Type, report: CpsForm):
        self.name = name
        self.ret = ret
        self.report = report
        self.last = None

    def tail(self, shape: str):
        self.report.tails.append((self.name, shape))
        self.last = shape

    def bad(self, pos, reason: str):
        self.report.violations.append((self.name, pos, reason))

    def stmts(self, stmts: list, top: bool):
        i, n = 0, len(stmts)
        while i < n:
            s = stmts[i]
            if isinstance(s, A.FunDef):
                i += 1
                continue
            k = tail_call_at(stmts, i, self.ret)
            if k:
                self.tail(TAIL_CALL)
                return self.after(stmts, i + k)
            if _stores_result(s) and i + 1 < n and tail_call_at(stmts, i + 1, self.ret):
                self.tail(EXTERN_THEN_TAIL)
                return self.after(stmts, i + 1 + tail_call_at(stmts, i + 1, self.ret))
            if isinstance(s, A.Return):
                if has_suspending(s.value):
                    self.bad(s.pos, "suspending call inside a returned expression")
                else:
                    self.tail(PLAIN_RETURN)
                return self.after(stmts, i + 1)
            if isinstance(s, A.If):
                if has_suspending(s.cond):
                    self.bad(s.pos, "suspending call in a condition")
                self.stmts(s.then.stmts, False)
                if s.else_ is not None:
                    self.stmts(s.else_.stmts, False)
            elif isinstance(s, (A.While, A.Goto, A.Label)):
                self.bad(s.pos, f"{type(s).__name__.lower()} left after splitting")
            elif isinstance(s, A.Block):
                self.stmts(s.stmts, False)
            elif any(has_suspending(e) for e in A.stmt_exprs(s)):
                self.bad(s.pos, "suspending call not in tail position")
            i += 1
        if top:
            # falling off the end is an implicit plain return
            self.tail(PLAIN_RETURN)

    def after(self, stmts: list, j: int):
        if j < len(stmts):
            self.bad(stmts[j].pos, "statement after a tail position")


def verify_function(f: A.Function, report: CpsForm | None = None) -> CpsForm:
    report = report if report is not None else CpsForm()
    v = _Verifier(f.name, f.ret, report)
    v.stmts(f.body.stmts, True)
    report.tail_shape[f.name] = v.last
    for s in f.body.stmts:
        if isinstance(s, A.FunDef):
            verify_function(s.func, report)
    return report


def verify_cps_form(f: A.Function) -> CpsForm:
    """Classify every tail position of ``f`` and of its nested functions."""
    return verify_function(f)
