"""Random program generators for property tests and benchmarks.

``call_graph_program`` builds annotation-checking workloads: many small
functions with random annotations, direct calls, function pointers and
address-taking, plus the call structure the generator intended, so tests
can compare against it without going through the analyser.

``coroutine_program`` builds terminating, correctly annotated programs
that exercise every translation pass: loops, early returns, forward gotos,
suspending calls nested in expressions, address-taken locals, coroutine
function pointers, recursion and nested ``co_enter``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field


@dataclass
class GeneratedGraph:
    source: str
    edges: dict = field(default_factory=dict)  # node id -> set of callee node ids
    roots: set = field(default_factory=set)
    defined: set = field(default_factory=set)


def call_graph_program(rng: random.Random, n_funcs: int = 50, max_calls: int = 4) -> GeneratedGraph:
    """A program of ``n_funcs`` argument-free void functions."""
    names = [f"f{i}" for i in range(n_funcs)]
    anns = {n: rng.choices(["", "coroutine_fn ", "blocking_fn "], weights=[5, 4, 1])[0] for n in names}
    extern = {n: rng.random() < 0.15 for n in names}
    g = GeneratedGraph("")
    retained = set()
    lines = []
    for n in names:
        g.edges[n] = set()
        if extern[n]:
            lines.append(f"extern void {anns[n]}{n}();")
    ptrs = []
    coroutine_ptrs = set()
    for j in range(rng.randint(0, max(1, n_funcs // 10))):
        ann = rng.choice(["", "coroutine_fn "])
        target = rng.choice([n for n in names if anns[n] == ann] or names)
        retained.add(target)
        ptrs.append(f"p{j}")
        lines.append(f"void {ann}(*p{j})(void) = &{target};")
        if ann:
            coroutine_ptrs.add(f"p{j}")
    for n in names:
        if extern[n]:
            continue
        g.defined.add(n)
        stmts = []
        for _ in range(rng.randint(0, max_calls)):
            if ptrs and rng.random() < 0.2:
                p = rng.choice(ptrs)
                stmts.append(f"{p}();")
                g.edges[n].add(f"*{p}")
                g.edges.setdefault(f"*{p}", set())
                if p in coroutine_ptrs:
                    g.roots.add(f"*{p}")
            else:
                callee = rng.choice(names)
                stmts.append(f"{callee}();")
                g.edges[n].add(callee)
        if rng.random() < 0.1:
            t = rng.choice(names)
            stmts.append(f"void {anns[t]}(*q)(void) = &{t};")
            retained.add(t)
        lines.append(f"void {anns[n]}{n}() {{ {' '.join(stmts)} }}")
    g.roots |= {n for n in names if anns[n] and anns[n] != "blocking_fn " and (extern[n] or n in retained)}
    g.source = "\n".join(lines) + "\n"
    return g


# --------------------------------------------------------------------------
# executable programs


class _Fn:
    def __init__(self, name: str, kind: str, ret: str, params: list):
        self.name = name
        self.kind = kind  # "native", "coroutine", "entry"
        self.ret = ret
        self.params = params
        self.recursive = False


class _ProgGen:
    def __init__(self, rng: random.Random, n_coroutines: int, n_natives: int):
        self.rng = rng
        self.n_globals = rng.randint(0, 2)
        self.natives: list = []
        self.coros: list = []
        self.entries: list = []
        self.fnptr_globals: list = []
        self.out: list = []
        self.n_coroutines = n_coroutines
        self.n_natives = n_natives
        self.loop_vars: set = set()

    # -- expressions ----------------------------------------------------------

    def atom(self, vars_: list) -> str:
        r = self.rng.random()
        if vars_ and r < 0.5:
            return self.rng.choice(vars_)
        if self.n_globals and r < 0.6:
            return f"g{self.rng.randrange(self.n_globals)}"
        return str(self.rng.randint(-2, 5))

    def expr(self, vars_: list, depth: int = 2, natives: list = ()) -> str:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.35:
            return self.atom(vars_)
        r = rng.random()
        if r < 0.45:
            op = rng.choice(["+", "-", "*", "+", "-", "<", "==", "!=", ">="])
            return f"({self.expr(vars_, depth - 1, natives)} {op} {self.expr(vars_, depth - 1, natives)})"
        if r < 0.55:
            op = rng.choice(["/", "%"])
            return f"({self.expr(vars_, depth - 1, natives)} {op} {rng.choice([2, 3, -2, 7])})"
        if r < 0.65:
            return f"{rng.choice(['-', '!'])}{self.atom(vars_)}"
        if r < 0.75:
            op = rng.choice(["&&", "||"])
            return f"({self.expr(vars_, depth - 1, natives)} {op} {self.expr(vars_, depth - 1, natives)})"
        if natives:
            f = rng.choice(natives)
            args = ", ".join(self.expr(vars_, depth - 1, natives) for _ in f.params)
            return f"{f.name}({args})"
        return self.atom(vars_)

    # -- natives ----------------------------------------------------------------

    def native(self, i: int, earlier: list) -> _Fn:
        rng = self.rng
        f = _Fn(f"n{i}", "native", "int", ["a", "b"][: rng.randint(1, 2)])
        lines = [f"int {f.name}({', '.join('int ' + p for p in f.params)}) {{"]
        vars_ = list(f.params)
        if rng.random() < 0.3:
            lines.append(f"  print({self.expr(vars_, 1, earlier)});")
        if rng.random() < 0.4:
            lines.append(f"  int t = {self.expr(vars_, 2, earlier)};")
            vars_.append("t")
        if rng.random() < 0.3 and self.n_globals:
            g = f"g{rng.randrange(self.n_globals)}"
            lines.append(f"  {g} = {g} + 1;")
        lines.append(f"  if ({self.expr(vars_, 1, earlier)}) {{ return {self.expr(vars_, 2, earlier)}; }}")
        lines.append(f"  return {self.expr(vars_, 2, earlier)};")
        lines.append("}")
        self.out.append("\n".join(lines))
        return f

    # -- coroutines -------------------------------------------------------------------

    def coroutine(self, i: int, entry: bool) -> _Fn:
        rng = self.rng
        if entry:
            f = _Fn(f"e{i}", "entry", "void", ["a"])
        else:
            ret = rng.choice(["int", "void"])
            f = _Fn(f"c{i}", "coroutine", ret, ["a"] if rng.random() < 0.8 else ["a", "b"])
            f.recursive = ret == "int" and rng.random() < 0.3
        self.cur = f
        self.label = None
        self.label_used = False
        self.counter = 0
        body = []
        vars_ = list(f.params)
        if f.recursive:
            body.append(f"  if (a > 0) {{ print({f.name}({', '.join(['a - 1'] + ['b'] * (len(f.params) - 1))}) + a); }}")
        self.block(body, vars_, 2, 1, budget=[rng.randint(3, 9)])
        if not any(y in line for line in body for y in ("co_yield", "co_sleep", "cpc_sleep")):
            body.append("  co_yield();")
        if self.label_used:
            body.append(f"{self.label}:")
            body.append(f"  print({rng.randint(100, 120)});")
        if f.ret == "int":
            body.append(f"  return {self.expr(vars_, 2, self.natives)};")
        ann = "coroutine_fn "
        params = ", ".join("int " + p for p in f.params)
        self.out.append(f"{f.ret} {ann}{f.name}({params}) {{\n" + "\n".join(body) + "\n}")
        return f

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def call_text(self, g: _Fn, vars_: list) -> str:
        if g.recursive:
            args = [str(self.rng.randint(0, 2))] + [self.atom(vars_) for _ in g.params[1:]]
        else:
            args = [self.expr(vars_, 1, self.natives) for _ in g.params]
        return f"{g.name}({', '.join(args)})"

    def block(self, out: list, vars_: list, depth: int, indent: int, budget: list):
        rng = self.rng
        pad = "  " * indent
        vars_ = list(vars_)
        # loop counters stay read-only so every loop terminates
        locals_ = [v for v in vars_ if v not in self.cur.params and v not in self.loop_vars]
        n = rng.randint(1, 4)
        callees = [c for c in self.coros]
        int_callees = [c for c in callees if c.ret == "int"]
        for _ in range(n):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            r = rng.random()
            if r < 0.12:
                out.append(f"{pad}print({self.expr(vars_, 2, self.natives)});")
            elif r < 0.22:
                v = self.fresh("x")
                out.append(f"{pad}int {v} = {self.expr(vars_, 2, self.natives)};")
                vars_.append(v)
                locals_.append(v)
            elif r < 0.30 and locals_:
                v = rng.choice(locals_)
                out.append(f"{pad}{v} = {self.expr(vars_, 2, self.natives)};")
            elif r < 0.40:
                y = rng.choice(["co_yield();", "co_yield();", f"co_sleep({rng.randint(0, 3)});", "cpc_sleep(1);"])
                out.append(f"{pad}{y}")
            elif r < 0.48 and callees:
                g = rng.choice(callees)
                if g.ret == "int" and rng.random() < 0.6:
                    v = self.fresh("r")
                    out.append(f"{pad}int {v} = {self.call_text(g, vars_)};")
                    vars_.append(v)
                    locals_.append(v)
                else:
                    out.append(f"{pad}{self.call_text(g, vars_)};")
            elif r < 0.54 and int_callees:
                g = rng.choice(int_callees)
                e = self.expr(vars_, 1, self.natives)
                op = rng.choice(["+", "-", "&&", "||", "*"])
                out.append(f"{pad}print(({e}) {op} {self.call_text(g, vars_)});")
            elif r < 0.62 and depth > 0:
                out.append(f"{pad}if ({self.expr(vars_, 2, self.natives)}) {{")
                self.block(out, vars_, depth - 1, indent + 1, budget)
                if rng.random() < 0.5:
                    out.append(f"{pad}}} else {{")
                    self.block(out, vars_, depth - 1, indent + 1, budget)
                out.append(f"{pad}}}")
            elif r < 0.70 and depth > 0:
                i = self.fresh("i")
                self.loop_vars.add(i)
                out.append(f"{pad}int {i} = 0;")
                out.append(f"{pad}while ({i} < {rng.randint(0, 3)}) {{")
                self.block(out, vars_ + [i], depth - 1, indent + 1, budget)
                out.append(f"{pad}  {i} = {i} + 1;")
                out.append(f"{pad}}}")
            elif r < 0.76:
                # address-taken local, updated through the pointer across a suspension
                v = self.fresh("b")
                p = self.fresh("p")
                out.append(f"{pad}int {v} = {self.expr(vars_, 1, self.natives)};")
                out.append(f"{pad}int *{p} = &{v};")
                out.append(f"{pad}co_yield();")
                out.append(f"{pad}*{p} = *{p} + {self.atom(vars_)};")
                out.append(f"{pad}print({v});")
                vars_.append(v)
            elif r < 0.80 and int_callees:
                g = rng.choice([c for c in int_callees if len(c.params) == 1 and not c.recursive] or [None])
                if g is None:
                    continue
                fp = self.fresh("fp")
                out.append(f"{pad}int coroutine_fn (*{fp})(int) = &{g.name};")
                out.append(f"{pad}print({fp}({self.expr(vars_, 1, self.natives)}));")
            elif r < 0.84:
                out.append(f"{pad}print(co_self());")
                out.append(f"{pad}print(in_coroutine());")
            elif r < 0.88 and self.cur.ret == "int":
                out.append(f"{pad}if ({self.expr(vars_, 1, self.natives)}) {{ return {self.expr(vars_, 1, self.natives)}; }}")
            elif r < 0.91 and self.cur.ret == "void":
                out.append(f"{pad}if ({self.expr(vars_, 1, self.natives)}) {{ return; }}")
            elif r < 0.94:
                if self.label is None:
                    self.label = "done"
                self.label_used = True
                out.append(f"{pad}if ({self.expr(vars_, 1, self.natives)}) {{ goto {self.label}; }}")
            elif r < 0.97 and self.entries:
                e = rng.choice(self.entries)
                h = self.fresh("h")
                out.append(f"{pad}int {h} = co_create(&{e.name});")
                out.append(f"{pad}co_enter({h}, {self.atom(vars_)});")
            elif self.n_globals:
                g = f"g{rng.randrange(self.n_globals)}"
                out.append(f"{pad}{g} = {g} + {self.expr(vars_, 1, self.natives)};")

    def program(self) -> str:
        rng = self.rng
        for i in range(self.n_globals):
            self.out.append(f"int g{i} = {rng.randint(0, 3)};")
        for i in range(self.n_natives):
            self.natives.append(self.native(i, list(self.natives)))
        for i in range(self.n_coroutines):
            entry = rng.random() < 0.35
            f = self.coroutine(i, entry)
            (self.entries if entry else self.coros).append(f)
        if not self.entries:
            self.entries.append(self.coroutine(self.n_coroutines, True))
        main = ["int main() {"]
        hs = []
        for j in range(rng.randint(1, 3)):
            e = rng.choice(self.entries)
            main.append(f"  int h{j} = co_create(&{e.name});")
            hs.append(f"h{j}")
        for h in hs:
            if rng.random() < 0.7:
                main.append(f"  co_enter({h}, {rng.randint(0, 4)});")
        if self.natives and rng.random() < 0.5:
            n = rng.choice(self.natives)
            main.append(f"  print({n.name}({', '.join(str(rng.randint(0, 3)) for _ in n.params)}));")
        main.append("  return 0;")
        main.append("}")
        self.out.append("\n".join(main))
        return "\n\n".join(self.out) + "\n"


def coroutine_program(rng: random.Random, n_coroutines: int = None, n_natives: int = None) -> str:
    """Source of a terminating, correctly annotated program with coroutines."""
    n_coroutines = n_coroutines if n_coroutines is not None else rng.randint(1, 5)
    n_natives = n_natives if n_natives is not None else rng.randint(0, 3)
    return _ProgGen(rng, n_coroutines, n_natives).program()
