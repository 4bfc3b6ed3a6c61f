import json
import random
import re

from hypothesis import given, settings, strategies as st

from conftest import CHECK_CORPUS, load_file, load_source, run_corpus_paths
from corocpc.corocheck import (
    ANNOTATION_LOSS,
    BLOCKING_CALL,
    HYBRID,
    MISSING,
    POINTER_INCONSISTENT,
    SPURIOUS,
    WRONG_BLOCKING,
    build_call_graph,
    check,
    collect_roots,
    diagnostics_json,
    emit_dot,
    emit_json,
    filter_graph,
    infer_annotations,
    reachability_oracle,
)
from corocpc.gen import call_graph_program


def kinds(source: str) -> list:
    return [(d.kind, d.subject) for d in check(load_source(source)).diagnostics]


def test_clean_program_has_no_findings():
    r = check(load_file(CHECK_CORPUS / "clean.mc"))
    assert r.clean and r.diagnostics == []


def test_empty_program():
    r = check(load_file(CHECK_CORPUS / "empty.mc"))
    assert r.clean and not r.graph.nodes


def test_missing_annotation_propagates_through_callers():
    src = "extern void coroutine_fn c(); void a() { c(); } void b() { a(); }"
    assert kinds(src) == [(MISSING, "a"), (MISSING, "b")]


def test_spurious_annotation():
    assert kinds("void coroutine_fn s() { }") == [(SPURIOUS, "s")]


def test_retained_coroutine_address_is_a_root():
    # its address escapes, so it is trusted even though it does not yield
    src = "void coroutine_fn s() { } void coroutine_fn (*p)(void) = &s;"
    assert kinds(src) == []


def test_wrong_blocking_and_blocking_call():
    src = (
        "extern void coroutine_fn c(); extern void blocking_fn b();"
        " void blocking_fn w() { c(); } void coroutine_fn x() { c(); b(); }"
    )
    got = kinds(src)
    assert (WRONG_BLOCKING, "w") in got and (BLOCKING_CALL, "x->b") in got
    assert (MISSING, "w") not in got


def test_blocking_call_from_native_is_fine():
    assert kinds("extern void blocking_fn b(); void n() { b(); }") == []


def test_hybrid_is_informational():
    r = check(load_file(CHECK_CORPUS / "hybrid.mc"))
    assert r.clean and [d.kind for d in r.diagnostics] == [HYBRID]
    assert r.diagnostics[0].informational


def test_annotation_loss_and_inconsistent_pointers():
    got = [d.kind for d in check(load_file(CHECK_CORPUS / "annotation_loss.mc")).diagnostics]
    assert got.count(ANNOTATION_LOSS) == 3 and got.count(POINTER_INCONSISTENT) == 1
    got = [d.kind for d in check(load_file(CHECK_CORPUS / "pointer_inconsistent.mc")).diagnostics]
    assert POINTER_INCONSISTENT in got


def test_diagnostics_sorted_by_position():
    ds = check(load_file(CHECK_CORPUS / "fig3.mc")).diagnostics
    keys = [(d.line, d.column) for d in ds]
    assert keys == sorted(keys)


def test_diagnostics_json_shape():
    ds = json.loads(diagnostics_json(check(load_file(CHECK_CORPUS / "fig3.mc")).diagnostics))
    assert {"kind", "subject", "line", "column", "message"} <= set(ds[0])


def test_dot_marks_shapes_and_mismatches():
    r = check(load_file(CHECK_CORPUS / "fig3.mc"))
    dot = emit_dot(r.graph, r.inference, r.diagnostics)
    assert dot.startswith("digraph")
    assert re.search(r'"missing" \[[^]]*shape=box[^]]*dashed', dot)
    assert re.search(r'"native" \[[^]]*shape=ellipse', dot)
    assert re.search(r'"spurious" \[[^]]*shape=ellipse[^]]*color=red', dot)
    assert '"wrong_call" -> "block" [style=dashed, color=red]' in dot
    assert '"ptr_call" -> "*coro_fun_ptr" [arrowhead=empty]' in dot


def test_json_graph_and_filter():
    r = check(load_source("extern void x(); void coroutine_fn (*p)(void) = 0; void n() { x(); } void coroutine_fn c() { p(); n(); }"))
    full = json.loads(emit_json(r.graph, r.inference))
    ids = {n["id"] for n in full["nodes"]}
    assert "x" in ids
    small = filter_graph(r.graph, r.inference)
    assert "x" not in small.nodes and "n" in small.nodes


def test_corpus_programs_are_clean():
    for path in run_corpus_paths():
        assert check(load_file(path)).clean, path.name


def test_inference_matches_bundled_oracle():
    rng = random.Random(5)
    for _ in range(30):
        tp = load_source(call_graph_program(rng, rng.randint(1, 100)).source)
        g = build_call_graph(tp)
        roots = collect_roots(tp, g)
        assert infer_annotations(g, roots).coroutines() == reachability_oracle(g, roots)


def _add_call(source: str, caller: str, callee: str):
    pat = re.compile(rf"(void (?:coroutine_fn |blocking_fn )?{caller}\(\) \{{)")
    if not pat.search(source):
        return None
    return pat.sub(rf"\1 {callee}();", source, count=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 60), st.data())
def test_adding_a_call_never_removes_a_coroutine(seed, n, data):
    g = call_graph_program(random.Random(seed), n)
    before = check(load_source(g.source)).inference.coroutines()
    caller = data.draw(st.sampled_from(sorted(g.defined)), "caller") if g.defined else None
    callee = data.draw(st.sampled_from([f"f{i}" for i in range(n)]), "callee")
    if caller is None:
        return
    changed = _add_call(g.source, caller, callee)
    after = check(load_source(changed)).inference.coroutines()
    assert before <= after
    if callee in before:
        assert caller in after


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 80))
def test_fixpoint_is_sound_and_least(seed, n):
    tp = load_source(call_graph_program(random.Random(seed), n).source)
    g = build_call_graph(tp)
    roots = collect_roots(tp, g)
    coro = infer_annotations(g, roots).coroutines()
    # closed: every caller of a coroutine is a coroutine
    for e in g.edges:
        if e.callee in coro:
            assert e.caller in coro
    # least: every coroutine is a root or calls one
    succ = g.successors()
    for v in coro:
        assert v in roots or set(succ[v]) & coro


def test_fig3_structure_and_inferred_sets():
    tp = load_file(CHECK_CORPUS / "fig3.mc")
    p = tp.program
    externs = [f for f in p.functions if f.extern]
    assert len(externs) == 2 and len(p.globals) == 1
    # nine defined functions: native spurious good missing call_missing wrong call_block wrong_call ptr_call
    assert len(p.defined_functions()) == 9
    r = check(tp)
    assert r.inference.coroutines() == {"coro", "good", "missing", "call_missing", "wrong", "ptr_call", "wrong_call", "*coro_fun_ptr"}
    assert set(r.graph.nodes) - r.inference.coroutines() == {"native", "spurious", "call_block", "block"}
