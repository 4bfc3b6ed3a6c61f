"""Recursive-descent parser for ``.mc`` source text."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .errors import DuplicateDefinition, ParseError, UnknownAnnotation
from .prelude import builtin_names

RESERVED_PREFIX = "__cpc_"
DEFAULT_COROUTINE_KEYWORD = "coroutine_fn"
BLOCKING_KEYWORD = "blocking_fn"
NEEDCONT_KEYWORD = "needcont"

KEYWORDS = {"int", "void", "if", "else", "while", "goto", "return", "extern"}
CPS_KEYWORDS = {"cont", "push", "invoke", "nullcont", "__cpc_retval"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<pragma>\#[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/%<>=!&(){};,:])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # "id", "int", "op", "eof"
    text: str
    pos: A.Pos


def tokenize(source: str) -> tuple:
    """Split ``source`` into tokens; returns ``(tokens, pragmas)``."""
    tokens = []
    pragmas = []
    line, line_start, i = 1, 0, 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ParseError(f"unexpected character {source[i]!r}", A.Pos(line, i - line_start + 1))
        kind = m.lastgroup
        text = m.group()
        pos = A.Pos(line, i - line_start + 1)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "bcomment":
            nls = text.count("\n")
            if nls:
                line += nls
                line_start = i + text.rfind("\n") + 1
        elif kind == "pragma":
            pragmas.append((text[1:].split(), pos))
        elif kind in ("int", "id", "op"):
            tokens.append(Token(kind, text, pos))
        i = m.end()
    if "/*" in source[i:]:
        raise ParseError("unterminated comment", A.Pos(line, 1))
    tokens.append(Token("eof", "", A.Pos(line, n - line_start + 1)))
    return tokens, pragmas


class Parser:
    def __init__(self, source: str, coroutine_keyword: str = DEFAULT_COROUTINE_KEYWORD):
        self.tokens, pragmas = tokenize(source)
        self.cps = False
        for words, pos in pragmas:
            if words == ["pragma", "cps"]:
                self.cps = True
            else:
                raise ParseError(f"unknown directive #{' '.join(words)}", pos)
        self.i = 0
        self.coro_kw = coroutine_keyword
        self.ann_keywords = {coroutine_keyword, BLOCKING_KEYWORD, NEEDCONT_KEYWORD}
        self.keywords = KEYWORDS | self.ann_keywords | (CPS_KEYWORDS if self.cps else set())

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id" or t.text in self.keywords:
            raise ParseError(f"expected identifier, found {t.text or 'end of input'!r}", t.pos)
        return self.advance()

    def is_ident(self, t: Token) -> bool:
        return t.kind == "id" and t.text not in self.keywords

    def starts_decl(self) -> bool:
        t = self.tok
        return t.kind == "id" and (t.text in ("int", "void") or t.text in self.ann_keywords or (self.cps and t.text == "cont"))

    # -- declarations -----------------------------------------------------

    def annotations(self, kind: Optional[str], need_cont: bool) -> tuple:
        while self.tok.kind == "id" and self.tok.text in self.ann_keywords:
            t = self.advance()
            if t.text == NEEDCONT_KEYWORD:
                need_cont = True
                continue
            new = A.COROUTINE if t.text == self.coro_kw else A.BLOCKING
            if kind is not None and kind != new:
                raise ParseError("coroutine and blocking annotations are mutually exclusive", t.pos)
            kind = new
        return kind, need_cont

    def decl_spec(self) -> tuple:
        """Parse ``annots base annots``; returns (base type, Annotation-or-None, pos)."""
        pos = self.tok.pos
        kind, need_cont = self.annotations(None, False)
        t = self.tok
        if t.text == "int" and t.kind == "id":
            base: A.Type = A.INT
        elif t.text == "void" and t.kind == "id":
            base = A.VOID
        elif self.cps and t.text == "cont" and t.kind == "id":
            base = A.CONT
        else:
            raise ParseError(f"expected a type, found {t.text or 'end of input'!r}", t.pos)
        self.advance()
        kind, need_cont = self.annotations(kind, need_cont)
        # an identifier followed by a declarator is an attribute we do not know
        if self.is_ident(self.tok) and (self.is_ident(self.peek()) or (self.peek().text == "(" and self.peek(2).text == "*") or self.peek().text == "*"):
            raise UnknownAnnotation(f"unknown annotation {self.tok.text!r}", self.tok.pos)
        ann = None
        if kind is not None or need_cont:
            ann = A.Annotation(kind or A.NATIVE, need_cont)
        return base, ann, pos

    def pointer_base(self, base: A.Type, pos: A.Pos) -> A.Type:
        if base == A.INT:
            return A.INTPTR
        if base == A.CONT:
            return A.CONT
        raise ParseError("only int and cont pointers are supported", pos)

    def param_types(self) -> tuple:
        """Parameter list of a function type; names are returned too (possibly None)."""
        self.expect("(")
        types, names = [], []
        if self.accept(")"):
            return tuple(types), names
        if self.at("void") and self.peek().text == ")":
            self.advance()
            self.advance()
            return tuple(types), names
        while True:
            ty, name, pos = self.param()
            types.append(ty)
            names.append((name, pos))
            if self.accept(")"):
                break
            self.expect(",")
        return tuple(types), names

    def param(self) -> tuple:
        base, ann, pos = self.decl_spec()
        if self.at("(") and self.peek().text == "*":
            self.advance()
            self.advance()
            name = self.ident().text if self.is_ident(self.tok) else None
            self.expect(")")
            ptypes, _ = self.param_types()
            return self.funtype(ptypes, base, ann, pos), name, pos
        if self.accept("*"):
            ty = self.pointer_base(base, pos)
        else:
            ty = base
        if ann is not None:
            raise ParseError("annotations apply to function types only", pos)
        name = self.ident().text if self.is_ident(self.tok) else None
        if ty == A.VOID:
            raise ParseError("parameter of type void", pos)
        return ty, name, pos

    def funtype(self, params: tuple, ret: A.Type, ann, pos) -> A.FunType:
        if ret not in (A.INT, A.VOID):
            raise ParseError("functions return int or void", pos)
        return A.FunType(params, ret, ann or A.NATIVE_ANN)

    def type_name(self) -> A.Type:
        base, ann, pos = self.decl_spec()
        if self.at("(") and self.peek().text == "*":
            self.advance()
            self.advance()
            self.expect(")")
            ptypes, _ = self.param_types()
            return self.funtype(ptypes, base, ann, pos)
        if ann is not None:
            raise ParseError("annotations apply to function types only", pos)
        if self.accept("*"):
            return self.pointer_base(base, pos)
        return base

    def declaration(self, top: bool, extern: bool = False):
        """One declaration; returns a Function, GlobalDecl or VarDecl/FunDef."""
        base, ann, pos = self.decl_spec()
        if self.at("(") and self.peek().text == "*":
            # function pointer variable
            self.advance()
            self.advance()
            name_tok = self.ident()
            self.expect(")")
            ptypes, _ = self.param_types()
            ty = self.funtype(ptypes, base, ann, pos)
            return self.var_rest(name_tok, ty, top, extern)
        if self.accept("*"):
            ty = self.pointer_base(base, pos)
            if ann is not None:
                raise ParseError("annotations apply to function types only", pos)
            return self.var_rest(self.ident(), ty, top, extern)
        name_tok = self.ident()
        if self.at("("):
            ptypes, names = self.param_types()
            fty = self.funtype(ptypes, base, ann, pos)
            pnames = []
            for n, ppos in names:
                if n is None:
                    raise ParseError("parameter name required in a function declaration", ppos)
                pnames.append(n)
            body = None
            if self.at("{"):
                body = self.block()
                if extern:
                    raise ParseError("extern function with a body", name_tok.pos)
            else:
                self.expect(";")
            fn = A.Function(name_tok.text, fty, pnames, body, extern=extern, pos=name_tok.pos)
            if top:
                return fn
            if body is None:
                raise ParseError("local function prototypes are not supported", name_tok.pos)
            return A.FunDef(fn, pos=name_tok.pos)
        if ann is not None:
            raise ParseError("annotations apply to function types only", pos)
        if base == A.VOID:
            raise ParseError("variable of type void", name_tok.pos)
        return self.var_rest(name_tok, base, top, extern)

    def var_rest(self, name_tok: Token, ty: A.Type, top: bool, extern: bool):
        init = None
        if self.accept("="):
            init = self.expr()
        self.expect(";")
        if top:
            if extern:
                raise ParseError("extern variables are not supported", name_tok.pos)
            return A.GlobalDecl(name_tok.text, ty, init, pos=name_tok.pos)
        return A.VarDecl(name_tok.text, ty, init, pos=name_tok.pos)

    def program(self) -> list:
        decls = []
        while self.tok.kind != "eof":
            if self.accept(";"):
                continue
            extern = self.accept("extern")
            decls.append(self.declaration(top=True, extern=extern))
        return decls

    # -- statements -------------------------------------------------------

    def block(self) -> A.Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ParseError("unterminated block", start.pos)
            s = self.statement()
            if s is not None:
                stmts.append(s)
        self.advance()
        return A.Block(stmts, pos=start.pos)

    def as_block(self, s) -> A.Block:
        if isinstance(s, A.Block):
            return s
        return A.Block([] if s is None else [s], pos=s.pos if s is not None else A.NOPOS)

    def statement(self):
        t = self.tok
        if t.kind == "op" and t.text == "{":
            return self.block()
        if self.accept(";"):
            return None
        if t.kind == "id":
            if t.text == "if":
                self.advance()
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                then = self.as_block(self.statement())
                else_ = None
                if self.accept("else"):
                    else_ = self.as_block(self.statement())
                return A.If(cond, then, else_, pos=t.pos)
            if t.text == "while":
                self.advance()
                self.expect("(")
                cond = self.expr()
                self.expect(")")
                return A.While(cond, self.as_block(self.statement()), pos=t.pos)
            if t.text == "goto":
                self.advance()
                label = self.ident().text
                self.expect(";")
                return A.Goto(label, pos=t.pos)
            if t.text == "return":
                self.advance()
                value = None if self.at(";") else self.expr()
                self.expect(";")
                return A.Return(value, pos=t.pos)
            if self.starts_decl():
                return self.declaration(top=False)
            if self.is_ident(t) and self.peek().text == ":":
                self.advance()
                self.advance()
                return A.Label(t.text, pos=t.pos)
        e = self.expr()
        if self.accept("="):
            if not isinstance(e, (A.Var, A.Deref)):
                raise ParseError("assignment target must be a variable or *pointer", e.pos)
            value = self.expr()
            self.expect(";")
            return A.Assign(e, value, pos=t.pos)
        self.expect(";")
        return A.ExprStmt(e, pos=t.pos)

    # -- expressions ------------------------------------------------------

    _BINARY = [
        ("||",),
        ("&&",),
        ("==", "!="),
        ("<", "<=", ">", ">="),
        ("+", "-"),
        ("*", "/", "%"),
    ]

    def expr(self, level: int = 0) -> A.Expr:
        if level == len(self._BINARY):
            return self.unary()
        left = self.expr(level + 1)
        ops = self._BINARY[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.advance()
            right = self.expr(level + 1)
            left = A.BinOp(op.text, left, right, pos=op.pos)
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind == "op":
            if t.text in ("-", "!"):
                self.advance()
                return A.UnOp(t.text, self.unary(), pos=t.pos)
            if t.text == "*":
                self.advance()
                return A.Deref(self.unary(), pos=t.pos)
            if t.text == "&":
                self.advance()
                name = self.ident()
                return A.AddrOf(A.Var(name.text, pos=name.pos), pos=t.pos)
            if t.text == "(" and self.peek().kind == "id" and (
                self.peek().text in ("int", "void") or self.peek().text in self.ann_keywords or (self.cps and self.peek().text == "cont")
            ):
                self.advance()
                ty = self.type_name()
                self.expect(")")
                return A.Cast(ty, self.unary(), pos=t.pos)
        return self.postfix()

    def postfix(self) -> A.Expr:
        e = self.primary()
        while self.at("("):
            t = self.advance()
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.expr())
                    if not self.accept(","):
                        break
            self.expect(")")
            e = A.Call(e, args, pos=e.pos)
        return e

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text), pos=t.pos)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.cps and t.kind == "id":
            if t.text == "nullcont":
                self.advance()
                return A.NullCont(pos=t.pos)
            if t.text == "__cpc_retval":
                self.advance()
                return A.RetSlot(pos=t.pos)
            if t.text in ("push", "invoke"):
                self.advance()
                self.expect("(")
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                if t.text == "push":
                    if len(args) < 2:
                        raise ParseError("push needs a function and a continuation", t.pos)
                    return A.Push(args[0], args[1:-1], args[-1], pos=t.pos)
                if len(args) > 2:
                    raise ParseError("invoke takes a continuation and an optional value", t.pos)
                return A.Invoke(args[0], args[1] if len(args) == 2 else None, pos=t.pos)
        name = self.ident()
        return A.Var(name.text, pos=name.pos)


# --------------------------------------------------------------------------
# Post-parse resolution and validation


class _Resolver:
    def __init__(self, program: A.Program, allow_reserved: bool):
        self.program = program
        self.allow_reserved = allow_reserved
        self.global_vars = set()
        self.functions = set(builtin_names(program.cps))
        self.site = 0

    def check_name(self, name: str, pos: A.Pos):
        if not self.allow_reserved and name.startswith(RESERVED_PREFIX):
            raise ParseError(f"identifier {name!r} uses the reserved prefix {RESERVED_PREFIX}", pos)

    def run(self):
        defined, declared = {}, {}
        for d in self.program.decls:
            self.check_name(d.name, d.pos)
            if isinstance(d, A.GlobalDecl):
                if d.name in self.global_vars or d.name in declared:
                    raise DuplicateDefinition(f"{d.name!r} is defined twice", d.pos)
                self.global_vars.add(d.name)
            else:
                if d.name in self.global_vars:
                    raise DuplicateDefinition(f"{d.name!r} is defined twice", d.pos)
                if d.is_defined:
                    if d.name in defined:
                        raise DuplicateDefinition(f"function {d.name!r} is defined twice", d.pos)
                    defined[d.name] = d
                elif d.name in declared and not declared[d.name].is_defined:
                    raise DuplicateDefinition(f"function {d.name!r} is declared twice", d.pos)
                declared.setdefault(d.name, d)
                self.functions.add(d.name)
        for d in self.program.decls:
            if isinstance(d, A.GlobalDecl):
                if d.init is not None:
                    d.init = self.expr(d.init, [])
            else:
                self.function(d, [], set())

    def function(self, fn: A.Function, outer_scopes: list, outer_funs: set):
        seen = set()
        for p in fn.param_names:
            self.check_name(p, fn.pos)
            if p in seen:
                raise DuplicateDefinition(f"parameter {p!r} appears twice", fn.pos)
            seen.add(p)
        if fn.body is None:
            return
        self.labels(fn)
        nested = {s.func.name for s in fn.body.stmts if isinstance(s, A.FunDef)}
        scopes = outer_scopes + [set(fn.param_names)]
        self.block(fn.body, scopes, outer_funs | nested, new_scope=False)

    def labels(self, fn: A.Function):
        """Labels unique; gotos target an existing label, never inside a loop they are outside of."""
        where: dict = {}
        gotos = []

        def visit(stmts, loops: tuple):
            for s in stmts:
                if isinstance(s, A.Label):
                    if s.name in where:
                        raise DuplicateDefinition(f"label {s.name!r} is defined twice", s.pos)
                    where[s.name] = loops
                elif isinstance(s, A.Goto):
                    gotos.append((s, loops))
                elif isinstance(s, A.Block):
                    visit(s.stmts, loops)
                elif isinstance(s, A.If):
                    visit(s.then.stmts, loops)
                    if s.else_ is not None:
                        visit(s.else_.stmts, loops)
                elif isinstance(s, A.While):
                    visit(s.body.stmts, loops + (id(s),))

        visit(fn.body.stmts, ())
        for g, loops in gotos:
            if g.label not in where:
                raise ParseError(f"goto to undefined label {g.label!r}", g.pos)
            target = where[g.label]
            if loops[: len(target)] != target:
                raise ParseError(f"goto {g.label!r} jumps into a loop", g.pos)

    def block(self, b: A.Block, scopes: list, funs: set, new_scope: bool = True):
        if new_scope:
            scopes = scopes + [set()]
        for s in b.stmts:
            self.stmt(s, scopes, funs)

    def stmt(self, s, scopes: list, funs: set):
        if isinstance(s, A.VarDecl):
            self.check_name(s.name, s.pos)
            if s.init is not None:
                s.init = self.expr(s.init, scopes, funs)
            if s.name in scopes[-1]:
                raise DuplicateDefinition(f"{s.name!r} is declared twice in one scope", s.pos)
            scopes[-1].add(s.name)
        elif isinstance(s, A.Assign):
            s.value = self.expr(s.value, scopes, funs)
            s.target = self.expr(s.target, scopes, funs)
        elif isinstance(s, A.If):
            s.cond = self.expr(s.cond, scopes, funs)
            self.block(s.then, scopes, funs)
            if s.else_ is not None:
                self.block(s.else_, scopes, funs)
        elif isinstance(s, A.While):
            s.cond = self.expr(s.cond, scopes, funs)
            self.block(s.body, scopes, funs)
        elif isinstance(s, A.Return):
            if s.value is not None:
                s.value = self.expr(s.value, scopes, funs)
        elif isinstance(s, A.ExprStmt):
            s.expr = self.expr(s.expr, scopes, funs)
        elif isinstance(s, A.Block):
            self.block(s, scopes, funs)
        elif isinstance(s, A.FunDef):
            if not self.allow_reserved:
                raise ParseError("nested function definitions are not supported", s.pos)
            self.check_name(s.func.name, s.pos)
            self.function(s.func, scopes, funs)

    def is_local(self, name: str, scopes: list) -> bool:
        return any(name in sc for sc in scopes)

    def expr(self, e: A.Expr, scopes: list, funs: set = frozenset()) -> A.Expr:
        if isinstance(e, A.Var):
            if not self.is_local(e.name, scopes) and e.name not in self.global_vars and (e.name in funs or e.name in self.functions):
                return A.FunRef(e.name, pos=e.pos)
            return e
        if isinstance(e, A.AddrOf):
            e.operand = self.expr(e.operand, scopes, funs)
        elif isinstance(e, (A.Deref, A.UnOp, A.Cast)):
            e.operand = self.expr(e.operand, scopes, funs)
        elif isinstance(e, A.BinOp):
            e.left = self.expr(e.left, scopes, funs)
            e.right = self.expr(e.right, scopes, funs)
        elif isinstance(e, A.Call):
            e.callee = self.expr(e.callee, scopes, funs)
            e.args = [self.expr(a, scopes, funs) for a in e.args]
            e.site = self.site
            self.site += 1
        elif isinstance(e, A.Push):
            e.fn = self.expr(e.fn, scopes, funs)
            e.args = [self.expr(a, scopes, funs) for a in e.args]
            e.cont = self.expr(e.cont, scopes, funs)
        elif isinstance(e, A.Invoke):
            e.cont = self.expr(e.cont, scopes, funs)
            if e.value is not None:
                e.value = self.expr(e.value, scopes, funs)
        return e


def parse_program(
    source: str,
    source_name: str = "<input>",
    *,
    coroutine_keyword: str = DEFAULT_COROUTINE_KEYWORD,
    allow_reserved: bool = False,
) -> A.Program:
    """Parse mini-C source text into a Program.

    ``coroutine_keyword`` renames the coroutine annotation. Identifiers with
    the translator's reserved prefix are rejected unless ``allow_reserved``
    is set (printed intermediate stages need it).
    """
    parser = Parser(source, coroutine_keyword)
    decls = parser.program()
    program = A.Program(decls, source_name, cps=parser.cps)
    _Resolver(program, allow_reserved or parser.cps).run()
    return renumber_sites(program)


def renumber_sites(program: A.Program) -> A.Program:
    """Give every call expression a fresh, unique site id in program order."""
    n = 0
    for d in program.decls:
        roots = []
        if isinstance(d, A.GlobalDecl):
            if d.init is not None:
                roots = list(A.walk_expr(d.init))
        elif d.body is not None:
            roots = list(A.walk_exprs(d.body))
        for e in roots:
            if isinstance(e, A.Call):
                e.site = n
                n += 1
    return program
