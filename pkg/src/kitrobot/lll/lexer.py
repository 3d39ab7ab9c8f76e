"""Lexer for the robot low-level language.

Sources are UTF-8 text; spans are byte offsets. `#` starts a comment that
runs to end of line. The interrupt delimiter is U+00B0 with no ASCII alias.
"""

from __future__ import annotations

from dataclasses import dataclass

from kitrobot.diagnostics import Span

INTERRUPT_MARK = "°"

KEYWORDS = {"WAIT": "WAIT", "BREAK": "BREAK"}

_SINGLE = {
    ".": "DOT",
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    "<": "LANGLE",
    ">": "RANGLE",
    ";": "SEMI",
    ",": "COMMA",
    "&": "AMP",
    "|": "PIPE",
    "!": "BANG",
    "*": "STAR",
    INTERRUPT_MARK: "DEGREE",
}

TOKEN_NAMES = {
    "IDENT": "identifier",
    "INT": "number",
    "WAIT": "'WAIT'",
    "BREAK": "'BREAK'",
    "DOT": "'.'",
    "LPAREN": "'('",
    "RPAREN": "')'",
    "LBRACKET": "'['",
    "RBRACKET": "']'",
    "LANGLE": "'<'",
    "RANGLE": "'>'",
    "SEMI": "';'",
    "COMMA": "','",
    "AMP": "'&'",
    "PIPE": "'|'",
    "BANG": "'!'",
    "STAR": "'*'",
    "SLASHSLASH": "'//'",
    "DEGREE": "'°'",
    "EOF": "end of input",
}


class ParseError(Exception):
    """Lexical or syntactic failure, with a 1-based source position."""

    def __init__(self, message: str, line: int, column: int, expected: frozenset[str] = frozenset()):
        self.line = line
        self.column = column
        self.expected = expected
        super().__init__(f"{message} (line {line}, column {column})")

    @property
    def bare_message(self) -> str:
        return str(self).rsplit(" (line ", 1)[0]


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    span: Span
    value: int | None = None


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_rest(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    byte = 0
    line = 1
    col = 1
    n = len(text)

    def blen(ch: str) -> int:
        return 1 if ord(ch) < 0x80 else len(ch.encode("utf-8"))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            byte += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            byte += blen(ch)
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                byte += blen(text[i])
                i += 1
                col += 1
            continue
        start_byte, start_line, start_col = byte, line, col
        if ch == "/":
            if i + 1 < n and text[i + 1] == "/":
                i += 2
                byte += 2
                col += 2
                tokens.append(Token("SLASHSLASH", "//", Span(start_byte, byte, start_line, start_col)))
                continue
            raise ParseError("illegal character '/'", line, col)
        if ch in _SINGLE:
            i += 1
            byte += blen(ch)
            col += 1
            tokens.append(Token(_SINGLE[ch], ch, Span(start_byte, byte, start_line, start_col)))
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            lexeme = text[i:j]
            width = j - i
            i = j
            byte += width
            col += width
            tokens.append(
                Token("INT", lexeme, Span(start_byte, byte, start_line, start_col), int(lexeme))
            )
            continue
        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_rest(text[j]):
                j += 1
            lexeme = text[i:j]
            width = j - i
            i = j
            byte += width
            col += width
            ttype = KEYWORDS.get(lexeme, "IDENT")
            tokens.append(Token(ttype, lexeme, Span(start_byte, byte, start_line, start_col)))
            continue
        raise ParseError(f"illegal character {ch!r}", line, col)

    tokens.append(Token("EOF", "", Span(byte, byte, line, col)))
    return tokens
