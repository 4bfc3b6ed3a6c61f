"""The mini-C language: AST, parser, printer and type checker."""
from . import ast
from .errors import DuplicateDefinition, LangError, ParseError, TypeCheckFailed, UnknownAnnotation
from .parser import parse_program, renumber_sites
from .printer import print_program
from .typecheck import TypedProgram, typecheck

__all__ = [
    "ast",
    "DuplicateDefinition",
    "LangError",
    "ParseError",
    "TypeCheckFailed",
    "UnknownAnnotation",
    "parse_program",
    "renumber_sites",
    "print_program",
    "TypedProgram",
    "typecheck",
]
