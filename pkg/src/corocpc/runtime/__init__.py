"""Continuation runtime: trampoline, coroutine lifecycle and pool."""
from .continuation import INITIAL_CAPACITY, CapacityOverflow, Continuation, Frame, RuntimeFailure, Stats, UnknownFunctionId
from .core import (
    CREATED,
    DEFAULT_POOL_SIZE,
    RUNNING,
    TERMINATED,
    YIELD_ID,
    YIELDED,
    Coroutine,
    EnterRunning,
    EnterTerminated,
    FunctionTable,
    Pool,
    Runtime,
    SelfOutsideCoroutine,
    YieldOutsideCoroutine,
    run_frames,
    trampoline,
)

__all__ = [
    "INITIAL_CAPACITY", "CapacityOverflow", "Continuation", "Frame", "RuntimeFailure", "Stats", "UnknownFunctionId",
    "CREATED", "DEFAULT_POOL_SIZE", "RUNNING", "TERMINATED", "YIELD_ID", "YIELDED",
    "Coroutine", "EnterRunning", "EnterTerminated", "FunctionTable", "Pool", "Runtime",
    "SelfOutsideCoroutine", "YieldOutsideCoroutine", "run_frames", "trampoline",
]
