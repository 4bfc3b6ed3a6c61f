"""Schedules and the top-level driver shared by both engines."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

from ..lang.typecheck import TypedProgram
from ..runtime import DEFAULT_POOL_SIZE, RuntimeFailure
from .machine import DEFAULT_FUEL, FuelExhausted, Machine, RuntimeFault
from .trace import Trace

OK = "ok"
FUEL = "FuelExhausted"

# interpreted recursion goes through Python frames in the direct engine
_RECURSION_LIMIT = 10000


@dataclass(frozen=True)
class Schedule:
    """Coroutine ordinals to enter, in order, once ``main`` has returned.

    Decisions naming a coroutine that does not exist yet, or has already
    terminated, are skipped.  After the decisions every live coroutine is
    entered round-robin in creation order until none is left.
    """

    decisions: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        text = text.strip()
        if not text:
            return cls()
        return cls(tuple(int(x) for x in text.replace(",", " ").split()))

    def __str__(self) -> str:
        return ",".join(str(d) for d in self.decisions)


@dataclass
class RunResult:
    trace: Trace
    status: str = OK  # "ok", "FuelExhausted" or a fault kind
    message: str = ""
    steps: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OK

    def outcome(self) -> tuple:
        return tuple(self.trace.events), self.status


def execute(m: Machine, schedule: Schedule = Schedule(), fuel: int = DEFAULT_FUEL) -> RunResult:
    """Run ``m``'s program under ``schedule``; never raises for program errors."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, _RECURSION_LIMIT))
    m.reset(fuel)
    status, message = OK, ""
    try:
        m.call_main()
        for h in schedule.decisions:
            if h in m.live():
                m.tick()
                m.enter(h, 0)
        while True:
            live = m.live()
            if not live:
                break
            for h in live:
                if h in m.live():
                    m.tick()
                    m.enter(h, 0)
    except FuelExhausted as ex:
        status, message = FUEL, str(ex)
    except RuntimeFault as ex:
        status, message = ex.kind, str(ex)
    except RuntimeFailure as ex:
        status, message = type(ex).__name__, str(ex)
    except RecursionError:
        status, message = "StackOverflow", "interpreter recursion limit reached"
    finally:
        sys.setrecursionlimit(old)
    stats = m.runtime.stats_json() if hasattr(m, "runtime") else {}
    return RunResult(m.trace, status, message, fuel - max(m.fuel, 0), stats)


def run_direct(tp: TypedProgram, schedule: Schedule = Schedule(), fuel: int = DEFAULT_FUEL) -> RunResult:
    from .direct import DirectMachine

    return execute(DirectMachine(tp), schedule, fuel)


def run_cps(tp: TypedProgram, schedule: Schedule = Schedule(), fuel: int = DEFAULT_FUEL, pool_size: int = DEFAULT_POOL_SIZE) -> RunResult:
    from .cpsrun import CpsMachine

    return execute(CpsMachine(tp, pool_size=pool_size), schedule, fuel)
