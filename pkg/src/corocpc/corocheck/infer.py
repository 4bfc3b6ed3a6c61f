"""Root collection and backward propagation of coroutine-ness."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..lang.typecheck import TypedProgram
from .graph import CallGraph

COROUTINE = "coroutine"
NATIVE = "native"


@dataclass
class InferenceResult:
    inferred: dict = field(default_factory=dict)  # node id -> "coroutine" | "native"
    roots: set = field(default_factory=set)
    rounds: int = 0

    def is_coroutine(self, nid: str) -> bool:
        return self.inferred.get(nid) == COROUTINE

    def coroutines(self) -> set:
        return {n for n, v in self.inferred.items() if v == COROUTINE}


def collect_roots(tp: TypedProgram, g: CallGraph) -> set:
    """Nodes trusted to be coroutines.

    Extern coroutine declarations, defined coroutine functions whose address
    escapes (they may be called through a coroutine pointer elsewhere), and
    indirect calls whose callee type carries the coroutine convention.
    """
    roots = set()
    for n in g.nodes.values():
        if not n.given.is_coroutine:
            continue
        if n.indirect or n.extern or n.address_retained:
            roots.add(n.id)
    return roots


def infer_annotations(g: CallGraph, roots: set) -> InferenceResult:
    """Least fixpoint: a node is a coroutine iff it reaches a root along call edges."""
    pred = g.predecessors()
    coro = set(r for r in roots if r in g.nodes)
    work = deque(coro)
    pops = 0
    while work:
        n = work.popleft()
        pops += 1
        for caller in pred[n]:
            if caller not in coro:
                coro.add(caller)
                work.append(caller)
    inferred = {n: (COROUTINE if n in coro else NATIVE) for n in g.nodes}
    return InferenceResult(inferred, set(roots), pops)


def reachability_oracle(g: CallGraph, roots: set) -> set:
    """Brute force: depth-first search from every node for a root."""
    succ = g.successors()
    out = set()
    for start in g.nodes:
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            if n in roots:
                out.add(start)
                break
            for m in succ[n]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
    return out
