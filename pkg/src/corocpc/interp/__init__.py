"""Reference interpreter, CPS engine, schedules and differential testing."""
from .cpsrun import CpsMachine
from .direct import DirectMachine
from .machine import DEFAULT_FUEL, FuelExhausted, RuntimeFault
from .schedule import FUEL, OK, RunResult, Schedule, execute, run_cps, run_direct
from .trace import ENTER, PRINT, TERM, YIELD, Trace, lifecycle_ok

__all__ = [
    "CpsMachine", "DirectMachine", "DEFAULT_FUEL", "FuelExhausted", "RuntimeFault",
    "FUEL", "OK", "RunResult", "Schedule", "execute", "run_cps", "run_direct",
    "ENTER", "PRINT", "TERM", "YIELD", "Trace", "lifecycle_ok",
]
