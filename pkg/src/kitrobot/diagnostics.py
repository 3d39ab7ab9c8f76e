"""Shared diagnostic types: source spans and issue records."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Half-open byte range in a source text, plus the 1-based line/column of its start."""

    start: int
    end: int
    line: int = 1
    column: int = 1


DUMMY_SPAN = Span(0, 0)


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding. `span` is set for source findings, `vertex` for graph ones."""

    code: str
    message: str
    span: Span | None = None
    vertex: str | None = None

    def render(self, source_name: str = "<input>") -> str:
        if self.span is not None:
            return f"{source_name}:{self.span.line}:{self.span.column}: error[{self.code}]: {self.message}"
        if self.vertex is not None:
            return f"{source_name}: vertex {self.vertex}: error[{self.code}]: {self.message}"
        return f"{source_name}: error[{self.code}]: {self.message}"


def sort_by_position(diags: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: d.span.start if d.span is not None else -1)
