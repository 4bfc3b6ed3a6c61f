import math

import pytest
from hypothesis import given, settings, strategies as st

from corocpc.runtime import (
    CREATED,
    INITIAL_CAPACITY,
    TERMINATED,
    YIELD_ID,
    YIELDED,
    CapacityOverflow,
    Continuation,
    EnterRunning,
    EnterTerminated,
    FunctionTable,
    Pool,
    Runtime,
    SelfOutsideCoroutine,
    UnknownFunctionId,
    YieldOutsideCoroutine,
    run_frames,
    trampoline,
)


def test_push_pop_lifo():
    k = Continuation()
    k.push(1, (10,)).push(2, (20,))
    assert len(k) == 2 and k.top().fn == 2
    assert k.pop().args == [20] and k.pop().args == [10] and k.empty


def test_growth_doubles_from_initial_capacity():
    k = Continuation()
    assert k.capacity == INITIAL_CAPACITY == 8
    for i in range(9):
        k.push(1, (i,))
    assert k.capacity == 16 and k.stats.reallocations == 1
    assert [k.pop().args[0] for _ in range(9)] == list(range(8, -1, -1))


def test_growth_is_logarithmic():
    for n in [9, 16, 17, 1000, 65536, 65537]:
        k = Continuation()
        for _ in range(n):
            k.push(1)
        assert k.stats.reallocations == math.ceil(math.log2(n / 8))


def test_hard_cap():
    k = Continuation(initial_capacity=2, hard_cap=5)
    for _ in range(5):
        k.push(1)
    assert k.capacity == 5
    with pytest.raises(CapacityOverflow):
        k.push(1)


def test_bad_initial_capacity():
    with pytest.raises(ValueError):
        Continuation(initial_capacity=0)


def test_set_return_fills_slot_of_next_frame():
    k = Continuation().push(1, (0, 7), ret_slot=0)
    k.set_return(42)
    assert k.top().args == [42, 7]
    k2 = Continuation().push(1, (5,))
    k2.set_return(9)
    assert k2.top().args == [5]


@settings(max_examples=200)
@given(st.lists(st.one_of(st.integers(1, 50), st.just(None)), max_size=300))
def test_continuation_matches_list_model(ops):
    k, model = Continuation(), []
    for op in ops:
        if op is None:
            if model:
                assert k.pop().fn == model.pop()
        else:
            k.push(op, (op,))
            model.append(op)
        assert len(k) == len(model)
        assert (k.top().fn if model else None) == (model[-1] if model else None)
        assert k.capacity >= len(model) and k.capacity % INITIAL_CAPACITY == 0


def test_function_table_ids():
    t = FunctionTable()
    assert t.id_of("co_yield") == YIELD_ID
    a = t.register("a", lambda k: None)
    assert a == 1 and t.name_of(a) == "a" and t.register("a", lambda k: None) == a
    with pytest.raises(UnknownFunctionId):
        t.lookup(99)
    with pytest.raises(UnknownFunctionId):
        t.id_of("missing")


def test_trampoline_runs_nested_pushes_in_order():
    log = []
    t = FunctionTable()
    ids = {}
    ids["b"] = t.register("b", lambda k, x: log.append(("b", x)))
    ids["a"] = t.register("a", lambda k, x: (log.append(("a", x)), k.push(ids["b"], (x + 1,))))
    k = Continuation().push(ids["b"], (0,)).push(ids["a"], (10,))
    assert trampoline(k, t) is k and k.empty
    assert log == [("a", 10), ("b", 11), ("b", 0)]


def test_corrupt_function_id():
    with pytest.raises(UnknownFunctionId):
        run_frames(Continuation().push(77), FunctionTable())


def _counter_runtime(pool=0, steps=2):
    t = FunctionTable()
    ids = {}
    rt = Runtime(t, Pool(pool))

    def body(k, n):
        if n < steps:
            k.push(ids["body"], (n + 1,))
            rt.co_yield(k)

    ids["body"] = t.register("body", body)
    return rt, ids["body"]


def test_lifecycle_states():
    rt, fid = _counter_runtime(steps=2)
    co = rt.create(fid)
    assert co.state == CREATED
    assert rt.enter(co, 0) == YIELDED
    assert rt.enter(co) == YIELDED
    assert rt.enter(co) == TERMINATED
    with pytest.raises(EnterTerminated):
        rt.enter(co)
    assert rt.stats.yields == 2 and rt.stats.terminated == 1


def test_yield_as_last_action_is_not_termination():
    t = FunctionTable()
    rt = Runtime(t)
    fid = t.register("y", lambda k, a: rt.co_yield(k))
    co = rt.create(fid)
    assert rt.enter(co, 0) == YIELDED
    assert rt.enter(co) == TERMINATED


def test_enter_running_is_rejected():
    t = FunctionTable()
    rt = Runtime(t)
    box = {}
    errors = []

    def body(k, a):
        try:
            rt.enter(box["co"])
        except EnterRunning:
            errors.append("running")

    box["co"] = rt.create(t.register("again", body))
    rt.enter(box["co"], 0)
    assert errors == ["running"]


def test_need_cont_primitives():
    t = FunctionTable()
    rt = Runtime(t)
    seen = []
    fid = t.register("probe", lambda k, a: seen.append((Runtime.self_of(k), Runtime.in_coroutine(k))))
    co = rt.create(fid)
    rt.enter(co, 0)
    assert seen == [(co, True)]
    assert Runtime.in_coroutine(None) is False
    with pytest.raises(SelfOutsideCoroutine):
        Runtime.self_of(None)
    with pytest.raises(YieldOutsideCoroutine):
        rt.co_yield(None)


def test_pool_is_bounded():
    rt, fid = _counter_runtime(pool=2, steps=0)
    cos = [rt.create(fid) for _ in range(4)]
    for co in cos:
        rt.enter(co, 0)
    assert len(rt.pool) == 2 and rt.stats.freed == 2
    a, b, c = rt.create(fid), rt.create(fid), rt.create(fid)
    assert a.from_pool and b.from_pool and not c.from_pool
    assert rt.stats.pool_hits == 2 and rt.stats.pool_misses == 5


def test_recycled_coroutine_gets_a_fresh_ordinal_and_empty_continuation():
    rt, fid = _counter_runtime(pool=4, steps=1)
    co = rt.create(fid)
    rt.enter(co, 0)
    rt.enter(co)
    first = co.ordinal
    again = rt.create(fid)
    assert again is co and again.ordinal != first and again.continuation.empty and again.state == CREATED


def test_listener_events():
    events = []
    t = FunctionTable()
    rt = Runtime(t, listener=lambda kind, co: events.append((kind, co.ordinal)))
    fid = t.register("y", lambda k, a: rt.co_yield(k))
    co = rt.create(fid)
    rt.enter(co, 0)
    rt.enter(co)
    assert events == [("ENTER", 1), ("YIELD", 1), ("ENTER", 1), ("TERM", 1)]


def test_stats_json():
    rt, fid = _counter_runtime(pool=8)
    rt.enter(rt.create(fid), 0)
    d = rt.stats_json()
    assert d["pool_max"] == 8 and d["created"] == 1 and "reallocations" in d
