import sys

import pytest

from conftest import RUN_CORPUS, load_file, load_source
from corocpc.cps import translate
from corocpc.interp import (
    FUEL,
    OK,
    CpsMachine,
    DirectMachine,
    Schedule,
    Trace,
    execute,
    lifecycle_ok,
    run_cps,
    run_direct,
)
from corocpc.interp.difftest import diff_test, first_divergence, schedules_for


def both(source: str, schedule: str = "", fuel: int = 10**6):
    tp = load_source(source)
    a = run_direct(tp, Schedule.parse(schedule), fuel)
    b = run_cps(translate(tp), Schedule.parse(schedule), fuel)
    return a, b


def prints(r) -> list:
    return [v for k, v in r.trace.events if k == "PRINT"]


def test_c_division_truncates_toward_zero():
    a, b = both("int main() { print(7 / 2); print(-7 / 2); print(7 % -2); print(-7 % 2); print(-8 / 3); return 0; }")
    assert prints(a) == prints(b) == [3, -3, 1, -1, -2]


def test_division_by_zero_faults():
    a, b = both("int main() { int z = 0; print(1 / z); return 0; }")
    assert a.status == b.status == "DivisionByZero"


def test_null_deref_faults():
    a, _ = both("int main() { int *p = 0; print(*p); return 0; }")
    assert a.status == "NullDeref"


def test_falling_off_an_int_function_returns_zero():
    a, b = both("int f(int x) { if (x) { return 5; } } int main() { print(f(1)); print(f(0)); return 0; }")
    assert prints(a) == prints(b) == [5, 0]


def test_declaration_without_initializer_resets_each_time():
    src = "int main() { int i = 0; while (i < 3) { int x; print(x); x = 9; i = i + 1; } return 0; }"
    a, b = both(src)
    assert prints(a) == prints(b) == [0, 0, 0]


def test_short_circuit_values_and_effects():
    src = "int t(int v) { print(v); return v; } int main() { print(t(0) && t(1)); print(t(2) || t(3)); print(t(4) && t(5)); return 0; }"
    a, _ = both(src)
    assert prints(a) == [0, 0, 2, 1, 4, 5, 1]


def test_evaluation_order_left_to_right():
    src = "int t(int v) { print(v); return v; } int f(int a, int b) { return a - b; } int main() { print(f(t(1), t(2)) + t(3)); return 0; }"
    a, _ = both(src)
    assert prints(a) == [1, 2, 3, 2]


def test_integers_are_unbounded():
    a, b = both("int main() { int x = 1; int i = 0; while (i < 100) { x = x * 2; i = i + 1; } print(x); return 0; }")
    assert prints(a) == prints(b) == [2**100]


def test_no_main():
    a, _ = both("void f() { }")
    assert a.status == "NoMain"


def test_null_function_call():
    a, b = both("void (*p)(void) = 0; int main() { p(); return 0; }")
    assert a.status == b.status == "NullCall"


def test_fuel_exhaustion_in_both_engines():
    a, b = both("void coroutine_fn c(int a) { while (1) { co_yield(); } } int main() { co_enter(co_create(&c), 0); return 0; }", fuel=500)
    assert a.status == b.status == FUEL
    assert first_divergence(a, b) is None


def test_suspending_call_outside_coroutine():
    # the translator refuses this program, so only the reference engine sees it
    a = run_direct(load_source("int main() { co_yield(); return 0; }"), Schedule())
    assert a.status == "SuspendOutsideCoroutine"


PING = """
void coroutine_fn w(int id) {
  print(id); co_yield();
  print(id + 10); co_yield();
  print(id + 20);
}
int main() {
  int a = co_create(&w);
  int b = co_create(&w);
  co_enter(a, 1);
  co_enter(b, 2);
  return 0;
}
"""


def test_default_schedule_is_round_robin():
    a, b = both(PING)
    assert prints(a) == prints(b) == [1, 2, 11, 12, 21, 22]
    assert a.trace.events == b.trace.events


def test_explicit_schedule_order():
    a, b = both(PING, "2,2,1")
    assert prints(a) == prints(b) == [1, 2, 12, 22, 11, 21]


def test_decisions_for_dead_coroutines_are_skipped():
    a, b = both(PING, "2,2,2,2,9")
    assert a.ok and prints(a) == prints(b) == [1, 2, 12, 22, 11, 21]


def test_handles_and_self():
    src = "void coroutine_fn c(int a) { print(co_self()); print(in_coroutine()); } int main() { print(in_coroutine()); int h = co_create(&c); print(h); co_enter(h, 0); return 0; }"
    a, b = both(src)
    assert prints(a) == prints(b) == [0, 1, 1, 1]


def test_enter_bad_handle():
    a, b = both("int main() { co_enter(5, 0); return 0; }")
    assert a.status == b.status == "BadHandle"


def test_create_with_native_entry():
    a = run_direct(load_source("void n(int a) { } int main() { co_create(&n); return 0; }"), Schedule())
    assert a.status == "BadEntry"


@pytest.mark.parametrize("name,status", [
    ("fault_enter_terminated", "EnterTerminated"),
    ("fault_enter_running", "EnterRunning"),
    ("fault_null_call", "NullCall"),
])
def test_corpus_faults(name, status):
    tp = load_file(RUN_CORPUS / f"{name}.mc")
    a, b = run_direct(tp, Schedule()), run_cps(translate(tp), Schedule())
    assert a.status == b.status == status and a.trace.events == b.trace.events


def test_machines_are_reusable_across_runs():
    tp = load_source(PING)
    dm, cm = DirectMachine(tp), CpsMachine(translate(tp))
    first = [execute(dm, Schedule((2, 1))).trace.events, execute(cm, Schedule((2, 1))).trace.events]
    again = [execute(dm, Schedule((2, 1))).trace.events, execute(cm, Schedule((2, 1))).trace.events]
    assert first == again and first[0] == first[1]


def test_recursion_limit_restored():
    before = sys.getrecursionlimit()
    both(PING)
    assert sys.getrecursionlimit() == before


def test_direct_engine_rejects_translated_code():
    tp = load_source(PING)
    with pytest.raises(ValueError):
        DirectMachine(translate(tp))
    with pytest.raises(ValueError):
        CpsMachine(tp)


def test_trace_text_roundtrip_and_lifecycle():
    a, _ = both(PING)
    t = Trace.from_text(a.trace.to_text())
    assert t.events == a.trace.events and lifecycle_ok(t)
    bad = Trace()
    bad.add("YIELD", 1)
    assert not lifecycle_ok(bad)


def test_schedule_parse_and_str():
    s = Schedule.parse("1, 2,3")
    assert s.decisions == (1, 2, 3) and Schedule.parse(str(s)) == s
    assert Schedule.parse("").decisions == ()


def test_schedule_enumeration_sizes():
    scheds, exhaustive = schedules_for(3)
    assert exhaustive and len(scheds) == sum(3**d for d in range(7))
    scheds, exhaustive = schedules_for(4, samples=100)
    assert not exhaustive and len(scheds) == 100 and scheds[0] == Schedule()
    assert all(1 <= x <= 4 for s in scheds for x in s.decisions)
    assert schedules_for(0) == ([Schedule()], True)
    assert schedules_for(20, samples=10, seed=1) == schedules_for(20, samples=10, seed=1)


def test_diff_test_report():
    rep = diff_test(load_source(PING))
    assert rep.passed and rep.exhaustive and rep.schedules == 127 and rep.statuses == {OK: 127}
    assert '"passed": true' in rep.dumps()
