"""Observable events of a run and their text form."""
from __future__ import annotations

from dataclasses import dataclass, field

PRINT = "PRINT"
ENTER = "ENTER"
YIELD = "YIELD"
TERM = "TERM"
EVENT_KINDS = (PRINT, ENTER, YIELD, TERM)


@dataclass
class Trace:
    events: list = field(default_factory=list)  # (kind, int)

    def add(self, kind: str, value: int):
        self.events.append((kind, value))

    def to_text(self) -> str:
        return "".join(f"{k} {v}\n" for k, v in self.events)

    @classmethod
    def from_text(cls, text: str) -> "Trace":
        t = cls()
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            kind, value = line.split()
            if kind not in EVENT_KINDS:
                raise ValueError(f"unknown trace event {kind!r}")
            t.add(kind, int(value))
        return t

    def __len__(self) -> int:
        return len(self.events)


def lifecycle_ok(trace: Trace) -> bool:
    """ENTER/YIELD/TERM events of each coroutine follow its lifecycle."""
    state = {}
    running = []
    for kind, c in trace.events:
        s = state.get(c, "created")
        if kind == ENTER:
            if s not in ("created", "yielded"):
                return False
            state[c] = "running"
            running.append(c)
        elif kind in (YIELD, TERM):
            if s != "running" or not running or running[-1] != c:
                return False
            running.pop()
            state[c] = "yielded" if kind == YIELD else "terminated"
    return True
