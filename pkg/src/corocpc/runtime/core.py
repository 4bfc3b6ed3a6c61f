"""Trampoline, coroutines, the pool, and the coroutine API."""
from __future__ import annotations

from collections import deque
from typing import Callable, Optional

from .continuation import INITIAL_CAPACITY, Continuation, RuntimeFailure, Stats, UnknownFunctionId

# Function id reserved for the yield primitive.  The trampoline recognises
# it by identity and never runs a body for it.
YIELD_ID = 0

CREATED = "Created"
RUNNING = "Running"
YIELDED = "Yielded"
TERMINATED = "Terminated"

DEFAULT_POOL_SIZE = 64


class EnterRunning(RuntimeFailure):
    pass


class EnterTerminated(RuntimeFailure):
    pass


class SelfOutsideCoroutine(RuntimeFailure):
    pass


class YieldOutsideCoroutine(RuntimeFailure):
    pass


def _yield_body(k, *args):
    raise AssertionError("the yield primitive has no body; the trampoline intercepts it")


class FunctionTable:
    """Maps integer ids to callables ``fn(k, *args)``; id 0 is the yield primitive."""

    def __init__(self, yield_name: str = "co_yield"):
        self.fns: list = [_yield_body]
        self.names: list = [yield_name]
        self.ids: dict = {yield_name: YIELD_ID}

    def register(self, name: str, fn: Callable) -> int:
        if name in self.ids:
            fid = self.ids[name]
            self.fns[fid] = fn
            return fid
        self.fns.append(fn)
        self.names.append(name)
        self.ids[name] = len(self.fns) - 1
        return self.ids[name]

    def id_of(self, name: str) -> int:
        try:
            return self.ids[name]
        except KeyError:
            raise UnknownFunctionId(f"no function {name!r} in the table") from None

    def lookup(self, fid: int) -> Callable:
        if not isinstance(fid, int) or fid < 0 or fid >= len(self.fns):
            raise UnknownFunctionId(f"corrupt continuation: function id {fid!r}")
        return self.fns[fid]

    def name_of(self, fid: int) -> str:
        self.lookup(fid)
        return self.names[fid]


def run_frames(k: Continuation, table: FunctionTable) -> bool:
    """Trampoline loop; True if it stopped at a yield frame, False once ``k`` is empty."""
    while True:
        if k.length == 0:
            return False
        f = k.pop()
        if f.fn == YIELD_ID:
            return True
        table.lookup(f.fn)(k, *f.args)


def trampoline(k: Continuation, table: FunctionTable) -> Continuation:
    """Run frames off ``k`` until it is empty or a yield frame is popped."""
    run_frames(k, table)
    return k


class Coroutine:
    __slots__ = ("state", "continuation", "entry", "from_pool", "ordinal")

    def __init__(self, entry: int, continuation: Continuation, ordinal: int):
        self.state = CREATED
        self.continuation = continuation
        self.entry = entry
        self.from_pool = False
        self.ordinal = ordinal

    def __repr__(self) -> str:
        return f"Coroutine(#{self.ordinal}, {self.state}, entry={self.entry})"


class Pool:
    """Terminated coroutines kept for reuse, at most ``max_size`` of them."""

    def __init__(self, max_size: int = DEFAULT_POOL_SIZE):
        self.max_size = max_size
        self.free: deque = deque()

    def take(self) -> Optional[Coroutine]:
        return self.free.popleft() if self.free else None

    def give(self, co: Coroutine) -> bool:
        if len(self.free) >= self.max_size:
            return False
        self.free.append(co)
        return True

    @property
    def enabled(self) -> bool:
        return self.max_size > 0

    def __len__(self) -> int:
        return len(self.free)


class Runtime:
    """One scheduler context: a function table, a pool and statistics.

    Which coroutine is running is never recorded here; need-cont
    primitives recover it from the continuation they are handed.
    """

    def __init__(
        self,
        table: FunctionTable,
        pool: Optional[Pool] = None,
        initial_capacity: int = INITIAL_CAPACITY,
        hard_cap: Optional[int] = None,
        listener: Optional[Callable] = None,
    ):
        self.table = table
        self.pool = pool if pool is not None else Pool(0)
        self.initial_capacity = initial_capacity
        self.hard_cap = hard_cap
        self.listener = listener
        self.stats = Stats()

    def _emit(self, kind: str, co: Coroutine):
        if self.listener is not None:
            self.listener(kind, co)

    def create(self, entry: int) -> Coroutine:
        self.table.lookup(entry)
        self.stats.created += 1
        co = self.pool.take() if self.pool.enabled else None
        if co is not None:
            self.stats.pool_hits += 1
            co.state = CREATED
            co.entry = entry
            co.from_pool = True
            co.ordinal = self.stats.created
            co.continuation.clear()
            return co
        if self.pool.enabled:
            self.stats.pool_misses += 1
        k = Continuation(self.initial_capacity, self.hard_cap, stats=self.stats)
        co = Coroutine(entry, k, self.stats.created)
        k.owner = co
        return co

    def enter(self, co: Coroutine, arg=0) -> str:
        """Run ``co`` until it yields or terminates; returns the new state."""
        if co.state == RUNNING:
            raise EnterRunning(f"coroutine {co.ordinal} is already running")
        if co.state == TERMINATED:
            raise EnterTerminated(f"coroutine {co.ordinal} has terminated")
        if co.state == CREATED:
            co.continuation.push(co.entry, (arg,))
        co.state = RUNNING
        self._emit("ENTER", co)
        if not run_frames(co.continuation, self.table):
            co.state = TERMINATED
            self.stats.terminated += 1
            self._emit("TERM", co)
            self._release(co)
            return TERMINATED
        co.state = YIELDED
        self._emit("YIELD", co)
        return YIELDED

    def _release(self, co: Coroutine):
        co.continuation.clear()
        if not (self.pool.enabled and self.pool.give(co)):
            self.stats.freed += 1

    # -- primitives handed to translated code ---------------------------------

    def co_yield(self, k: Optional[Continuation]) -> None:
        if k is None:
            raise YieldOutsideCoroutine("yield outside coroutine context")
        self.stats.yields += 1
        k.push(YIELD_ID)

    @staticmethod
    def self_of(k: Optional[Continuation]) -> Coroutine:
        if k is None:
            raise SelfOutsideCoroutine("co_self called outside coroutine context")
        return k.owner

    @staticmethod
    def in_coroutine(k: Optional[Continuation]) -> bool:
        return k is not None

    def stats_json(self) -> dict:
        d = self.stats.to_dict()
        d["pool_size"] = len(self.pool)
        d["pool_max"] = self.pool.max_size
        return d
