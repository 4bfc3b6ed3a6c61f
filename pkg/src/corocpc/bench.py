"""Micro-benchmarks of the continuation runtime: lifecycle, nesting, yield.

The coroutine bodies are Python callables written in the shape the
translator produces, so only runtime costs are measured.
"""
from __future__ import annotations

import sys
import time
from dataclasses import asdict, dataclass, field

from .runtime import DEFAULT_POOL_SIZE, FunctionTable, Pool, Runtime

BENCHMARKS = ("lifecycle", "nesting", "yield")
NESTING_DEPTH = 1000
WARMUPS = 3


@dataclass
class BenchResult:
    benchmark: str
    pool: bool
    iterations: int
    ns_per_op: float
    ops: int
    reallocations: int
    pool_hits: int
    counter: int
    created: int
    terminated: int
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


class _Shared:
    counter = 0


def _setup(pool: bool):
    table = FunctionTable()
    rt = Runtime(table, Pool(DEFAULT_POOL_SIZE if pool else 0))
    return table, rt


def _lifecycle(pool: bool, iters: int):
    table, rt = _setup(pool)
    st = _Shared()

    def empty(k, arg):
        st.counter += 1

    fid = table.register("empty", empty)

    def run():
        for _ in range(iters):
            rt.enter(rt.create(fid), 0)

    return rt, st, run, iters


def _nesting(pool: bool, iters: int, depth: int = NESTING_DEPTH):
    table, rt = _setup(pool)
    st = _Shared()
    ids = {}

    def nest(k, level):
        st.counter += 1
        if level + 1 < depth:
            rt.enter(rt.create(ids["nest"]), level + 1)

    ids["nest"] = table.register("nest", nest)

    def run():
        for _ in range(iters):
            rt.enter(rt.create(ids["nest"]), 0)

    return rt, st, run, iters * depth


def _yield(pool: bool, iters: int):
    table, rt = _setup(pool)
    st = _Shared()
    ids = {}

    def loop(k, *_):
        if st.counter > 0:
            st.counter -= 1
            k.push(ids["loop"])
            rt.co_yield(k)

    ids["loop"] = table.register("loop", loop)

    def run():
        st.counter = iters
        co = rt.create(ids["loop"])
        for _ in range(iters):
            rt.enter(co, 0)
        rt.enter(co, 0)  # terminates

    return rt, st, run, iters


_BUILDERS = {"lifecycle": _lifecycle, "nesting": _nesting, "yield": _yield}


def run_bench(name: str, pool: bool = True, iters: int = 10000, warmups: int = WARMUPS) -> BenchResult:
    """Per-operation mean of one measured round after ``warmups`` discarded rounds."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown benchmark {name!r}")
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20 * NESTING_DEPTH))
    try:
        for _ in range(warmups):
            _BUILDERS[name](pool, iters)[2]()
        rt, st, run, ops = _BUILDERS[name](pool, iters)
        if name == "nesting":
            st.counter = 0
        t0 = time.perf_counter_ns()
        run()
        elapsed = time.perf_counter_ns() - t0
    finally:
        sys.setrecursionlimit(old)
    s = rt.stats
    return BenchResult(
        benchmark=name,
        pool=pool,
        iterations=iters,
        ns_per_op=max(elapsed, 1) / max(ops, 1),
        ops=ops,
        reallocations=s.reallocations,
        pool_hits=s.pool_hits,
        counter=st.counter,
        created=s.created,
        terminated=s.terminated,
        stats=rt.stats_json(),
    )
