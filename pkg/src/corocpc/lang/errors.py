from __future__ import annotations

from .ast import Pos


class LangError(Exception):
    """Base class for errors raised while reading or checking a program."""

    def __init__(self, message: str, pos: Pos | None = None):
        self.message = message
        self.pos = pos or Pos()
        super().__init__(f"{self.pos}: {message}" if pos else message)

    @property
    def line(self) -> int:
        return self.pos.line

    @property
    def column(self) -> int:
        return self.pos.col


class ParseError(LangError):
    pass


class DuplicateDefinition(ParseError):
    pass


class UnknownAnnotation(ParseError):
    pass


class TypeError_(LangError):
    """One type error; ``kind`` names the violated rule."""

    def __init__(self, kind: str, message: str, pos: Pos | None = None):
        self.kind = kind
        super().__init__(f"{kind}: {message}", pos)


class TypeCheckFailed(LangError):
    """Raised by ``typecheck`` with every error it found."""

    def __init__(self, errors: list):
        self.errors = errors
        first = errors[0]
        super().__init__(
            "; ".join(str(e) for e in errors[:5]) + (" ..." if len(errors) > 5 else ""),
            first.pos,
        )

    @property
    def kinds(self) -> list:
        return [e.kind for e in self.errors]
