"""Built-in runtime primitives visible to every program."""
from __future__ import annotations

from . import ast as A

ENTRY_TYPE = A.FunType((A.INT,), A.VOID, A.COROUTINE_ANN)

# name -> type in the direct (untranslated) convention
BUILTINS = {
    "print": A.FunType((A.INT,), A.VOID),
    "co_yield": A.FunType((), A.VOID, A.COROUTINE_ANN),
    "co_sleep": A.FunType((A.INT,), A.VOID, A.COROUTINE_ANN),
    "cpc_sleep": A.FunType((A.INT,), A.VOID, A.COROUTINE_ANN),
    "co_create": A.FunType((ENTRY_TYPE,), A.INT),
    "co_enter": A.FunType((A.INT, A.INT), A.VOID),
    "in_coroutine": A.FunType((), A.INT, A.Annotation(A.NATIVE, True)),
    "co_self": A.FunType((), A.INT, A.Annotation(A.COROUTINE, True)),
    "box_alloc": A.FunType((), A.INTPTR),
}

YIELDING = {"co_yield", "co_sleep", "cpc_sleep"}


def cps_type(t: A.Type) -> A.Type:
    """Rewrite a type to the continuation-taking convention."""
    if not isinstance(t, A.FunType):
        return t
    params = tuple(cps_type(p) for p in t.params)
    if t.ann.is_coroutine or t.ann.need_cont:
        params = params + (A.CONT,)
    return A.FunType(params, t.ret, t.ann)


CPS_BUILTINS = {name: cps_type(t) for name, t in BUILTINS.items()}


def builtin_names(cps: bool = False) -> set:
    return set(BUILTINS)


def builtin_type(name: str, cps: bool = False):
    return (CPS_BUILTINS if cps else BUILTINS).get(name)
