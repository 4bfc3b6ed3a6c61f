"""The full translation: box, normalize, split, lift, convert."""
from __future__ import annotations

from ..corocheck import build_call_graph, collect_roots, infer_annotations
from ..lang import ast as A
from ..lang.parser import renumber_sites
from ..lang.typecheck import TypedProgram
from .box import box_variables
from .convert import RefusesHybrid, cps_convert
from .form import CpsForm, verify_function
from .lift import lift
from .normalize import normalize
from .split import split
from .util import coroutine_functions

STAGES = ("parsed", "boxed", "normalized", "split", "lifted", "cps")
_PASSES = {
    "boxed": box_variables,
    "normalized": normalize,
    "split": split,
    "lifted": lift,
    "cps": cps_convert,
}


def hybrid_functions(tp: TypedProgram) -> list:
    """Native functions testing ``in_coroutine`` that can run inside a coroutine.

    Calls through native function pointers are assumed to reach every native
    function whose address is taken.
    """
    g = build_call_graph(tp)
    r = infer_annotations(g, collect_roots(tp, g))
    succ = g.successors()
    escaped = [n.id for n in g.nodes.values() if n.defined and n.address_retained and not n.given.is_coroutine]
    for n in g.nodes.values():
        if n.indirect and not r.is_coroutine(n.id):
            succ[n.id] = succ[n.id] + escaped
    start = [n for n in g.nodes if r.is_coroutine(n)]
    seen = set(start)
    stack = list(start)
    while stack:
        n = stack.pop()
        for m in succ[n]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    out = []
    for n in sorted(seen):
        node = g.nodes[n]
        if node.defined and not r.is_coroutine(n) and "in_coroutine" in succ[n]:
            out.append(node)
    return out


def run_pipeline(tp: TypedProgram, until: str = "cps") -> dict:
    """Every stage up to ``until``, keyed by stage name."""
    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    hybrids = hybrid_functions(tp)
    if hybrids and STAGES.index(until) > 0:
        n = hybrids[0]
        raise RefusesHybrid(
            f"{n.id} tests in_coroutine and is reachable from coroutine code; "
            "split it into a coroutine variant and a native variant",
            n.pos,
        )
    out = {"parsed": tp}
    cur = tp
    for stage in STAGES[1:]:
        cur = _PASSES[stage](cur)
        renumber_sites(cur.program)
        out[stage] = cur
        if stage == until:
            break
    return out


def translate(tp: TypedProgram) -> TypedProgram:
    """CPS-converted program; native functions are unchanged."""
    return run_pipeline(tp, "cps")["cps"]


def verify_program(p: A.Program) -> CpsForm:
    """CPS-form report over all coroutine functions of a split or lifted program."""
    report = CpsForm()
    for f in coroutine_functions(p):
        verify_function(f, report)
    return report
