"""AST for the mini-C language.

Positions, call-site ids and inferred types are carried on nodes but are
excluded from equality, so two programs compare equal when they have the
same structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Pos:
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOPOS = Pos()


# --------------------------------------------------------------------------
# Types

NATIVE = "native"
COROUTINE = "coroutine"
BLOCKING = "blocking"


@dataclass(frozen=True)
class Annotation:
    kind: str = NATIVE
    need_cont: bool = False

    @property
    def is_coroutine(self) -> bool:
        return self.kind == COROUTINE

    @property
    def is_blocking(self) -> bool:
        return self.kind == BLOCKING

    @property
    def suspends(self) -> bool:
        # need-cont primitives take the continuation but return normally
        return self.kind == COROUTINE and not self.need_cont


NATIVE_ANN = Annotation()
COROUTINE_ANN = Annotation(COROUTINE)
BLOCKING_ANN = Annotation(BLOCKING)


class Type:
    """Base class of the four value types."""

    is_fun = False

    def compatible(self, other: "Type") -> bool:
        return self == other

    def same_base(self, other: "Type") -> bool:
        return self == other


@dataclass(frozen=True)
class IntType(Type):
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class VoidType(Type):
    def __str__(self) -> str:
        return "void"


@dataclass(frozen=True)
class PtrType(Type):
    """Pointer to an int cell."""

    def __str__(self) -> str:
        return "int *"


@dataclass(frozen=True)
class ContType(Type):
    """Continuation handle; only appears in CPS-converted programs."""

    def __str__(self) -> str:
        return "cont *"


@dataclass(frozen=True)
class FunType(Type):
    params: tuple = ()
    ret: Type = VoidType()
    ann: Annotation = NATIVE_ANN

    is_fun = True

    def same_base(self, other: Type) -> bool:
        if not isinstance(other, FunType):
            return False
        if len(self.params) != len(other.params) or not self.ret.same_base(other.ret):
            return False
        return all(a.same_base(b) for a, b in zip(self.params, other.params))

    def compatible(self, other: Type) -> bool:
        return isinstance(other, FunType) and self.same_base(other) and self.ann == other.ann

    def __str__(self) -> str:
        from .printer import type_name

        return type_name(self)


INT = IntType()
VOID = VoidType()
INTPTR = PtrType()
CONT = ContType()


# --------------------------------------------------------------------------
# Expressions


@dataclass(eq=False)
class Expr:
    pos: Pos = field(default=NOPOS, kw_only=True, compare=False, repr=False)
    ty: Optional[Type] = field(default=None, kw_only=True, compare=False, repr=False)

    def children(self) -> list:
        return []


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class Var(Expr):
    name: str
    # "local", "param", "global" once resolved by the typechecker
    scope: Optional[str] = field(default=None, kw_only=True, compare=False, repr=False)


@dataclass
class FunRef(Expr):
    name: str


@dataclass
class AddrOf(Expr):
    operand: Expr

    def children(self):
        return [self.operand]


@dataclass
class Deref(Expr):
    operand: Expr

    def children(self):
        return [self.operand]


@dataclass
class Call(Expr):
    callee: Expr
    args: list
    site: int = field(default=-1, kw_only=True, compare=False, repr=False)

    def children(self):
        return [self.callee, *self.args]


@dataclass
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def children(self):
        return [self.left, self.right]


@dataclass
class UnOp(Expr):
    op: str
    operand: Expr

    def children(self):
        return [self.operand]


@dataclass
class Cast(Expr):
    type: Type
    operand: Expr

    def children(self):
        return [self.operand]


@dataclass
class Push(Expr):
    """``push(fn, args..., k)``: add a frame on a continuation."""

    fn: Expr
    args: list
    cont: Expr

    def children(self):
        return [self.fn, *self.args, self.cont]


@dataclass
class Invoke(Expr):
    """``invoke(k[, value])``: hand control (and a result) to the continuation."""

    cont: Expr
    value: Optional[Expr] = None

    def children(self):
        return [self.cont] + ([self.value] if self.value is not None else [])


@dataclass
class RetSlot(Expr):
    """Placeholder in a push for the callee's return value."""


@dataclass
class NullCont(Expr):
    """The null continuation handed to need-cont primitives outside coroutines."""


# --------------------------------------------------------------------------
# Statements


@dataclass(eq=False)
class Stmt:
    pos: Pos = field(default=NOPOS, kw_only=True, compare=False, repr=False)


@dataclass
class VarDecl(Stmt):
    name: str
    type: Type
    init: Optional[Expr] = None


@dataclass
class Assign(Stmt):
    target: Expr
    value: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: "Block"
    else_: Optional["Block"] = None


@dataclass
class While(Stmt):
    cond: Expr
    body: "Block"


@dataclass
class Goto(Stmt):
    label: str


@dataclass
class Label(Stmt):
    name: str


@dataclass
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Block(Stmt):
    stmts: list


@dataclass
class FunDef(Stmt):
    """Nested function definition (only produced by splitting)."""

    func: "Function"


# --------------------------------------------------------------------------
# Top level


@dataclass
class Function:
    name: str
    type: FunType
    param_names: list
    body: Optional[Block] = None
    extern: bool = False
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    @property
    def params(self) -> list:
        return list(zip(self.param_names, self.type.params))

    @property
    def annotation(self) -> Annotation:
        return self.type.ann

    @property
    def ret(self) -> Type:
        return self.type.ret

    @property
    def is_defined(self) -> bool:
        return self.body is not None

    @property
    def is_coroutine(self) -> bool:
        return self.type.ann.is_coroutine

    @property
    def labels(self) -> set:
        if self.body is None:
            return set()
        return {s.name for s in walk_stmts(self.body, into_fundefs=False) if isinstance(s, Label)}


@dataclass
class GlobalDecl:
    name: str
    type: Type
    init: Optional[Expr] = None
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


Decl = Union[Function, GlobalDecl]


@dataclass
class Program:
    decls: list = field(default_factory=list)
    source_name: str = field(default="<input>", compare=False)
    cps: bool = False

    @property
    def globals(self) -> list:
        return [d for d in self.decls if isinstance(d, GlobalDecl)]

    @property
    def functions(self) -> list:
        return [d for d in self.decls if isinstance(d, Function)]

    def function(self, name: str) -> Optional[Function]:
        """The definition of ``name`` if there is one, else its declaration."""
        found = None
        for f in self.functions:
            if f.name == name:
                if f.is_defined:
                    return f
                found = found or f
        return found

    def defined_functions(self) -> list:
        return [f for f in self.functions if f.is_defined]


# --------------------------------------------------------------------------
# Traversal helpers


def walk_stmts(stmt, into_fundefs: bool = True) -> Iterator[Stmt]:
    """Pre-order iteration over a statement and every statement inside it."""
    stack = [stmt]
    while stack:
        s = stack.pop()
        yield s
        kids: list = []
        if isinstance(s, Block):
            kids = s.stmts
        elif isinstance(s, If):
            kids = [s.then] + ([s.else_] if s.else_ is not None else [])
        elif isinstance(s, While):
            kids = [s.body]
        elif isinstance(s, FunDef) and into_fundefs and s.func.body is not None:
            kids = [s.func.body]
        stack.extend(reversed(kids))


def stmt_exprs(s: Stmt) -> list:
    """Top-level expressions directly owned by a statement."""
    if isinstance(s, VarDecl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Assign):
        return [s.target, s.value]
    if isinstance(s, (If, While)):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, ExprStmt):
        return [s.expr]
    return []


def walk_expr(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(x.children()))


def walk_exprs(stmt, into_fundefs: bool = True) -> Iterator[Expr]:
    for s in walk_stmts(stmt, into_fundefs):
        for e in stmt_exprs(s):
            yield from walk_expr(e)


def calls_in(stmt, into_fundefs: bool = True) -> Iterator[Call]:
    for e in walk_exprs(stmt, into_fundefs):
        if isinstance(e, Call):
            yield e


def direct_callee(call: Call) -> Optional[str]:
    """Name of the called function when the call is direct (``f()`` or ``(*f)()``)."""
    c = call.callee
    while isinstance(c, Deref):
        c = c.operand
    if isinstance(c, AddrOf):
        c = c.operand
    return c.name if isinstance(c, FunRef) else None
