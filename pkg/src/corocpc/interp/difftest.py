"""Differential testing: direct interpreter against the trampoline engine."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Optional

from ..cps import translate
from ..cps.util import clone
from ..lang import ast as A
from ..lang.typecheck import TypedProgram, typecheck
from ..runtime import DEFAULT_POOL_SIZE
from .cpsrun import CpsMachine
from .direct import DirectMachine
from .machine import DEFAULT_FUEL
from .schedule import FUEL, RunResult, Schedule, execute

MAX_DEPTH = 6
MAX_EXHAUSTIVE = 1100
DEFAULT_SAMPLES = 100
MAX_ALPHABET = 8


@dataclass
class Divergence:
    schedule: str
    index: int  # first differing event (len of the shorter trace if one is a prefix)
    direct: object
    cps: object
    direct_trace: list
    cps_trace: list
    direct_status: str
    cps_status: str

    def to_json(self) -> dict:
        return {
            "schedule": self.schedule,
            "index": self.index,
            "direct_event": list(self.direct) if self.direct else None,
            "cps_event": list(self.cps) if self.cps else None,
            "direct_status": self.direct_status,
            "cps_status": self.cps_status,
            "direct_trace": [f"{k} {v}" for k, v in self.direct_trace],
            "cps_trace": [f"{k} {v}" for k, v in self.cps_trace],
        }


@dataclass
class Report:
    passed: bool
    schedules: int
    exhaustive: bool
    divergence: Optional[Divergence] = None
    statuses: dict = field(default_factory=dict)  # status -> count over direct runs

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "schedules": self.schedules,
            "exhaustive": self.exhaustive,
            "statuses": self.statuses,
            "divergence": self.divergence.to_json() if self.divergence else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def schedules_for(n_coroutines: int, depth: int = MAX_DEPTH, limit: int = MAX_EXHAUSTIVE, samples: int = DEFAULT_SAMPLES, seed: int = 0):
    """(schedules, exhaustive): every schedule up to ``depth`` if that is at most ``limit`` of them."""
    alphabet = list(range(1, min(max(n_coroutines, 1), MAX_ALPHABET) + 1))
    if n_coroutines == 0:
        return [Schedule()], True
    total = sum(len(alphabet) ** d for d in range(depth + 1))
    if total <= limit:
        out = []
        for d in range(depth + 1):
            out.extend(Schedule(tuple(s)) for s in itertools.product(alphabet, repeat=d))
        return out, True
    rng = random.Random(seed)
    out = [Schedule()]
    while len(out) < samples:
        d = rng.randint(1, 2 * depth)
        out.append(Schedule(tuple(rng.choice(alphabet) for _ in range(d))))
    return out, False


def first_divergence(a: RunResult, b: RunResult) -> Optional[int]:
    ea, eb = a.trace.events, b.trace.events
    if a.status == FUEL or b.status == FUEL:
        # the engines count steps differently; compare what both produced
        n = min(len(ea), len(eb))
        for i in range(n):
            if ea[i] != eb[i]:
                return i
        return None
    for i, (x, y) in enumerate(zip(ea, eb)):
        if x != y:
            return i
    if len(ea) != len(eb) or a.status != b.status:
        return min(len(ea), len(eb))
    return None


def diff_test(
    tp: TypedProgram,
    n_schedules: int = DEFAULT_SAMPLES,
    fuel: int = DEFAULT_FUEL,
    translated: Optional[TypedProgram] = None,
    pool_size: int = DEFAULT_POOL_SIZE,
    depth: int = MAX_DEPTH,
    seed: int = 0,
) -> Report:
    """Compare traces of ``tp`` and its translation over many schedules.

    Exhaustive up to ``depth`` decisions when that is affordable, otherwise
    ``n_schedules`` seeded random schedules.
    """
    cps = translated if translated is not None else translate(tp)
    dm = DirectMachine(tp)
    cm = CpsMachine(cps, pool_size=pool_size)
    execute(dm, Schedule(), fuel)
    scheds, exhaustive = schedules_for(dm.created(), depth, samples=n_schedules, seed=seed)
    statuses: dict = {}
    for s in scheds:
        a = execute(dm, s, fuel)
        b = execute(cm, s, fuel)
        statuses[a.status] = statuses.get(a.status, 0) + 1
        i = first_divergence(a, b)
        if i is not None:
            ev = lambda r: r.trace.events[i] if i < len(r.trace.events) else None
            d = Divergence(str(s), i, ev(a), ev(b), list(a.trace.events), list(b.trace.events), a.status, b.status)
            return Report(False, len(scheds), exhaustive, d, statuses)
    return Report(True, len(scheds), exhaustive, None, statuses)


def drop_first_push(tp: TypedProgram) -> TypedProgram:
    """A deliberately broken translation: the first ``push`` loses its frame."""
    p = clone(tp.program)
    done = []

    def visit(e):
        if done:
            return e
        if isinstance(e, A.Push):
            done.append(e)
            return e.cont
        for attr in ("callee", "operand", "left", "right", "fn", "cont", "value"):
            x = getattr(e, attr, None)
            if isinstance(x, A.Expr):
                setattr(e, attr, visit(x))
        if isinstance(e, (A.Call, A.Push)):
            e.args = [visit(a) for a in e.args]
        return e

    for f in p.defined_functions():
        for s in A.walk_stmts(f.body):
            if isinstance(s, A.ExprStmt):
                s.expr = visit(s.expr)
        if done:
            break
    if not done:
        raise ValueError("program has no push to drop")
    return typecheck(p)
