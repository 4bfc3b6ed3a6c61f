"""Deterministic pretty-printer; its output parses back to an equal Program."""
from __future__ import annotations

from . import ast as A

INDENT = "  "

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY = 7
_POSTFIX = 8
_ATOM = 9


def annotation_text(ann: A.Annotation, coroutine_keyword: str = "coroutine_fn") -> str:
    words = []
    if ann.kind == A.COROUTINE:
        words.append(coroutine_keyword)
    elif ann.kind == A.BLOCKING:
        words.append("blocking_fn")
    if ann.need_cont:
        words.append("needcont")
    return " ".join(words)


def _spec(ret: A.Type, ann: A.Annotation) -> str:
    text = annotation_text(ann)
    return f"{ret} {text}" if text else str(ret)


def _param_types(params) -> str:
    return ", ".join(type_name(p) for p in params) if params else "void"


def type_name(t: A.Type) -> str:
    if isinstance(t, A.FunType):
        return f"{_spec(t.ret, t.ann)} (*)({_param_types(t.params)})"
    return str(t)


def declare(name: str, t: A.Type) -> str:
    """C declarator text for a variable or parameter called ``name``."""
    if isinstance(t, A.FunType):
        return f"{_spec(t.ret, t.ann)} (*{name})({_param_types(t.params)})"
    if isinstance(t, (A.PtrType, A.ContType)):
        return f"{t}{name}"
    return f"{t} {name}"


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.BinOp):
        return _PREC[e.op]
    if isinstance(e, (A.UnOp, A.Deref, A.AddrOf, A.Cast)):
        return _UNARY
    if isinstance(e, A.Call):
        return _POSTFIX
    return _ATOM


def _wrap(e: A.Expr, need: int) -> str:
    text = expr_text(e)
    return f"({text})" if _prec(e) < need else text


def expr_text(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, (A.Var, A.FunRef)):
        return e.name
    if isinstance(e, A.AddrOf):
        return "&" + expr_text(e.operand)
    if isinstance(e, A.Deref):
        return "*" + _wrap(e.operand, _UNARY)
    if isinstance(e, A.UnOp):
        return e.op + _wrap(e.operand, _UNARY)
    if isinstance(e, A.Cast):
        return f"({type_name(e.type)}) " + _wrap(e.operand, _UNARY)
    if isinstance(e, A.BinOp):
        p = _PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, A.Call):
        return _wrap(e.callee, _POSTFIX) + "(" + ", ".join(expr_text(a) for a in e.args) + ")"
    if isinstance(e, A.Push):
        parts = [e.fn, *e.args, e.cont]
        return "push(" + ", ".join(expr_text(a) for a in parts) + ")"
    if isinstance(e, A.Invoke):
        parts = [e.cont] + ([e.value] if e.value is not None else [])
        return "invoke(" + ", ".join(expr_text(a) for a in parts) + ")"
    if isinstance(e, A.RetSlot):
        return "__cpc_retval"
    if isinstance(e, A.NullCont):
        return "nullcont"
    raise TypeError(f"cannot print {e!r}")


class _Printer:
    def __init__(self):
        self.lines: list = []

    def emit(self, depth: int, text: str):
        self.lines.append(INDENT * depth + text)

    def function(self, f: A.Function, depth: int):
        params = ", ".join(declare(n, t) for n, t in f.params)
        head = f"{'extern ' if f.extern else ''}{_spec(f.ret, f.annotation)} {f.name}({params})"
        if f.body is None:
            self.emit(depth, head + ";")
            return
        self.emit(depth, head + " {")
        self.stmts(f.body.stmts, depth + 1)
        self.emit(depth, "}")

    def stmts(self, stmts, depth: int):
        for s in stmts:
            self.stmt(s, depth)

    def stmt(self, s: A.Stmt, depth: int):
        if isinstance(s, A.VarDecl):
            init = f" = {expr_text(s.init)}" if s.init is not None else ""
            self.emit(depth, declare(s.name, s.type) + init + ";")
        elif isinstance(s, A.Assign):
            self.emit(depth, f"{expr_text(s.target)} = {expr_text(s.value)};")
        elif isinstance(s, A.ExprStmt):
            self.emit(depth, expr_text(s.expr) + ";")
        elif isinstance(s, A.Return):
            self.emit(depth, "return;" if s.value is None else f"return {expr_text(s.value)};")
        elif isinstance(s, A.Goto):
            self.emit(depth, f"goto {s.label};")
        elif isinstance(s, A.Label):
            self.lines.append(INDENT * (depth - 1) + " " + s.name + ":")
        elif isinstance(s, A.If):
            self.emit(depth, f"if ({expr_text(s.cond)}) {{")
            self.stmts(s.then.stmts, depth + 1)
            if s.else_ is not None:
                self.emit(depth, "} else {")
                self.stmts(s.else_.stmts, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.While):
            self.emit(depth, f"while ({expr_text(s.cond)}) {{")
            self.stmts(s.body.stmts, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.Block):
            self.emit(depth, "{")
            self.stmts(s.stmts, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.FunDef):
            self.function(s.func, depth)
        else:
            raise TypeError(f"cannot print {s!r}")


def print_program(p: A.Program) -> str:
    pr = _Printer()
    if p.cps:
        pr.lines.append("#pragma cps")
    for d in p.decls:
        if isinstance(d, A.GlobalDecl):
            init = f" = {expr_text(d.init)}" if d.init is not None else ""
            pr.emit(0, declare(d.name, d.type) + init + ";")
        else:
            pr.function(d, 0)
    return "\n".join(pr.lines) + ("\n" if pr.lines else "")


def print_function(f: A.Function) -> str:
    pr = _Printer()
    pr.function(f, 0)
    return "\n".join(pr.lines) + "\n"
