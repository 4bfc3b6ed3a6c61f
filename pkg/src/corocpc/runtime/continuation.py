"""Growable continuations made of frames."""
from __future__ import annotations

from typing import Optional

INITIAL_CAPACITY = 8


class RuntimeFailure(Exception):
    """Base class of runtime errors."""


class CapacityOverflow(RuntimeFailure):
    pass


class UnknownFunctionId(RuntimeFailure):
    pass


class Frame:
    """One pending call: function id, saved arguments, and where a result goes."""

    __slots__ = ("fn", "args", "ret_slot")

    def __init__(self, fn: int, args: list, ret_slot: Optional[int] = None):
        self.fn = fn
        self.args = args
        self.ret_slot = ret_slot

    def __repr__(self) -> str:
        return f"Frame({self.fn}, {self.args}, {self.ret_slot})"


class Stats:
    """Counters shared by all continuations of one runtime context."""

    __slots__ = ("pushed", "popped", "reallocations", "pool_hits", "pool_misses", "created", "terminated", "freed", "yields")

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, 0)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__slots__}


class Continuation:
    """Frames in a contiguous buffer, top at ``length - 1``.

    The buffer starts at ``initial_capacity`` slots and doubles when full;
    it never shrinks.  ``owner`` is the coroutine the continuation belongs
    to, which is how need-cont primitives find their coroutine.
    """

    __slots__ = ("frames", "length", "capacity", "hard_cap", "owner", "stats")

    def __init__(self, initial_capacity: int = INITIAL_CAPACITY, hard_cap: Optional[int] = None, owner=None, stats: Optional[Stats] = None):
        if initial_capacity < 1:
            raise ValueError("initial capacity must be positive")
        self.frames: list = [None] * initial_capacity
        self.length = 0
        self.capacity = initial_capacity
        self.hard_cap = hard_cap
        self.owner = owner
        self.stats = stats if stats is not None else Stats()

    def push(self, fn: int, args=(), ret_slot: Optional[int] = None) -> "Continuation":
        if self.length == self.capacity:
            new = self.capacity * 2
            if self.hard_cap is not None and new > self.hard_cap:
                if self.capacity >= self.hard_cap:
                    raise CapacityOverflow(f"continuation exceeds {self.hard_cap} frames")
                new = self.hard_cap
            grown = [None] * new
            grown[: self.length] = self.frames[: self.length]
            self.frames = grown
            self.capacity = new
            self.stats.reallocations += 1
        self.frames[self.length] = Frame(fn, list(args), ret_slot)
        self.length += 1
        self.stats.pushed += 1
        return self

    def pop(self) -> Frame:
        self.length -= 1
        f = self.frames[self.length]
        self.frames[self.length] = None
        self.stats.popped += 1
        return f

    def top(self) -> Optional[Frame]:
        return self.frames[self.length - 1] if self.length else None

    def set_return(self, value) -> None:
        """Store a callee's result in the next frame, if that frame expects one."""
        f = self.top()
        if f is not None and f.ret_slot is not None:
            f.args[f.ret_slot] = value

    def clear(self) -> None:
        for i in range(self.length):
            self.frames[i] = None
        self.length = 0

    @property
    def empty(self) -> bool:
        return self.length == 0

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"Continuation({self.frames[: self.length]!r}, capacity={self.capacity})"

