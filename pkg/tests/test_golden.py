"""The alpha-equivalence comparator must reject what it should."""
from conftest import GOLDEN
from test_acceptance import alpha_equivalent

FIXED = {"void", "int", "coroutine_fn", "if", "return", "x", "print", "cpc_sleep", "cont", "push", "invoke"}


def test_identity_and_consistent_renaming():
    a = "void coroutine_fn loop(int x) { timeout(); loop(x); }"
    b = "void coroutine_fn f1(int x) { f2(); f1(x); }"
    assert alpha_equivalent(a, a, FIXED) and alpha_equivalent(b, a, FIXED)


def test_renaming_must_be_bijective():
    a = "void coroutine_fn loop(int x) { timeout(); loop(x); }"
    assert not alpha_equivalent("void coroutine_fn f(int x) { f(); f(x); }", a, FIXED)
    assert not alpha_equivalent("void coroutine_fn f(int x) { g(); h(x); }", a, FIXED)


def test_fixed_names_and_literals_must_match():
    assert not alpha_equivalent("print(y);", "print(x);", FIXED)
    assert not alpha_equivalent("print(1);", "print(2);", FIXED)
    assert not alpha_equivalent("if (x <= 0)", "if (x < 0)", FIXED)


def test_stages_are_not_interchangeable():
    split = (GOLDEN / "countdown.split.mc").read_text()
    lifted = (GOLDEN / "countdown.lifted.mc").read_text()
    cps = (GOLDEN / "countdown.cps.mc").read_text()
    assert not alpha_equivalent(split, lifted, FIXED)
    assert not alpha_equivalent(lifted, cps, FIXED)
