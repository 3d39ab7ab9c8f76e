"""Recursive-descent parser for the robot low-level language.

The grammar is unambiguous with one token of lookahead:

    program      := instructions? EOF
    instructions := instr (';' instr)* ';'?          (final ';' optional)
    instr        := call                             action
                  | '°' call '°'                     interrupt action
                  | INT '*' '(' instructions ')'     repetition
                  | '*' '[' cond ']' '(' instructions ')'
                  | '[' cond ']' '(' instructions ')' ('!' '(' instructions ')')?
                  | '<' cond '>' '(' instructions ')'
                  | '//' '(' instructions (',' instructions)* ')'
                  | 'WAIT' '(' INT ')'
                  | 'BREAK'
    cond         := and_expr ('|' and_expr)*         left associative
    and_expr     := atom ('&' atom)*                 left associative
    atom         := INT | '!' '(' cond ')' | '(' cond ')' | call
    call         := IDENT '.' IDENT '(' (cond (',' cond)*)? ')'

Whether a call atom is an integer action or a condition is settled by the
typechecker, not here; the two are syntactically identical.
"""

from __future__ import annotations

from kitrobot.diagnostics import Span
from kitrobot.lll.lexer import TOKEN_NAMES, ParseError, Token, tokenize
from kitrobot.lll.nodes import (
    Action,
    ActionInterrupt,
    And,
    Break,
    Call,
    Event,
    Expr,
    IfElse,
    Instr,
    IntLit,
    Not,
    Or,
    Parallel,
    Program,
    Repeat,
    Wait,
    While,
)

_MAX_DEPTH = 200

_INSTR_START = frozenset(
    {"IDENT", "DEGREE", "INT", "STAR", "LBRACKET", "LANGLE", "SLASHSLASH", "WAIT", "BREAK"}
)


class _Parser:
    def __init__(self, text: str, source_name: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.source_name = source_name
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.type != "EOF":
            self.pos += 1
        return t

    def error(self, expected: frozenset[str]) -> ParseError:
        t = self.tok
        names = ", ".join(sorted(TOKEN_NAMES[e] for e in expected))
        found = TOKEN_NAMES.get(t.type, t.text) if t.type == "EOF" else repr(t.text)
        return ParseError(f"expected {names}, found {found}", t.span.line, t.span.column, expected)

    def expect(self, ttype: str) -> Token:
        if self.tok.type != ttype:
            raise self.error(frozenset({ttype}))
        return self.advance()

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            t = self.tok
            raise ParseError("nesting too deep", t.span.line, t.span.column)

    def _leave(self) -> None:
        self.depth -= 1

    def parse_program(self) -> Program:
        if self.tok.type == "EOF":
            return Program((), self.source_name)
        top = self.instructions(frozenset({"EOF"}))
        self.expect("EOF")
        return Program(tuple(top), self.source_name)

    def instructions(self, stop: frozenset[str]) -> list[Instr]:
        instrs = [self.instr()]
        while True:
            if self.tok.type == "SEMI":
                self.advance()
                if self.tok.type in stop:
                    break
                instrs.append(self.instr())
            elif self.tok.type in stop:
                break
            else:
                raise self.error(frozenset({"SEMI"}) | stop)
        return instrs

    def instr(self) -> Instr:
        self._enter()
        try:
            t = self.tok
            if t.type == "IDENT":
                call = self.call()
                return Action(call, call.span)
            if t.type == "DEGREE":
                start = self.advance().span
                call = self.call()
                end = self.expect("DEGREE").span
                return ActionInterrupt(call, _join(start, end))
            if t.type == "INT":
                start = self.advance()
                self.expect("STAR")
                self.expect("LPAREN")
                body = self.instructions(frozenset({"RPAREN"}))
                end = self.expect("RPAREN").span
                return Repeat(start.value, tuple(body), _join(start.span, end))
            if t.type == "STAR":
                start = self.advance().span
                self.expect("LBRACKET")
                cond = self.cond()
                self.expect("RBRACKET")
                self.expect("LPAREN")
                body = self.instructions(frozenset({"RPAREN"}))
                end = self.expect("RPAREN").span
                return While(cond, tuple(body), _join(start, end))
            if t.type == "LBRACKET":
                start = self.advance().span
                cond = self.cond()
                self.expect("RBRACKET")
                self.expect("LPAREN")
                then_body = self.instructions(frozenset({"RPAREN"}))
                end = self.expect("RPAREN").span
                else_body = None
                if self.tok.type == "BANG":
                    self.advance()
                    self.expect("LPAREN")
                    else_body = tuple(self.instructions(frozenset({"RPAREN"})))
                    end = self.expect("RPAREN").span
                return IfElse(cond, tuple(then_body), else_body, _join(start, end))
            if t.type == "LANGLE":
                start = self.advance().span
                cond = self.cond()
                self.expect("RANGLE")
                self.expect("LPAREN")
                body = self.instructions(frozenset({"RPAREN"}))
                end = self.expect("RPAREN").span
                return Event(cond, tuple(body), _join(start, end))
            if t.type == "SLASHSLASH":
                start = self.advance().span
                self.expect("LPAREN")
                branches = [tuple(self.instructions(frozenset({"COMMA", "RPAREN"})))]
                while self.tok.type == "COMMA":
                    self.advance()
                    branches.append(tuple(self.instructions(frozenset({"COMMA", "RPAREN"}))))
                end = self.expect("RPAREN").span
                return Parallel(tuple(branches), _join(start, end))
            if t.type == "WAIT":
                start = self.advance().span
                self.expect("LPAREN")
                ticks = self.expect("INT")
                end = self.expect("RPAREN").span
                return Wait(ticks.value, _join(start, end))
            if t.type == "BREAK":
                span = self.advance().span
                return Break(span)
            raise self.error(_INSTR_START)
        finally:
            self._leave()

    def call(self) -> Call:
        obj = self.expect("IDENT")
        self.expect("DOT")
        method = self.expect("IDENT")
        self.expect("LPAREN")
        args: list[Expr] = []
        if self.tok.type != "RPAREN":
            args.append(self.cond())
            while self.tok.type == "COMMA":
                self.advance()
                args.append(self.cond())
        end = self.expect("RPAREN").span
        return Call(obj.text, method.text, tuple(args), _join(obj.span, end))

    def cond(self) -> Expr:
        self._enter()
        try:
            left = self.and_expr()
            while self.tok.type == "PIPE":
                self.advance()
                right = self.and_expr()
                left = Or(left, right, _join(_span_of(left), _span_of(right)))
            return left
        finally:
            self._leave()

    def and_expr(self) -> Expr:
        left = self.atom()
        while self.tok.type == "AMP":
            self.advance()
            right = self.atom()
            left = And(left, right, _join(_span_of(left), _span_of(right)))
        return left

    def atom(self) -> Expr:
        t = self.tok
        if t.type == "INT":
            self.advance()
            return IntLit(t.value, t.span)
        if t.type == "BANG":
            start = self.advance().span
            self.expect("LPAREN")
            inner = self.cond()
            end = self.expect("RPAREN").span
            return Not(inner, _join(start, end))
        if t.type == "LPAREN":
            self.advance()
            inner = self.cond()
            self.expect("RPAREN")
            return inner
        if t.type == "IDENT":
            return self.call()
        raise self.error(frozenset({"INT", "BANG", "LPAREN", "IDENT"}))


def _span_of(node) -> Span:
    return node.span


def _join(a: Span, b: Span) -> Span:
    return Span(a.start, b.end, a.line, a.column)


def parse(text: str, source_name: str = "<string>") -> Program:
    """Parse low-level-language source text into a Program AST.

    Raises ParseError with line/column (and the expected-token set for
    syntax errors). The whole-program empty source parses to an empty top
    sequence; nested bodies must contain at least one instruction.
    """
    return _Parser(text, source_name).parse_program()
