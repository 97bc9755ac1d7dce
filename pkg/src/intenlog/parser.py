"""Concrete grammar for formulas and terms.

The textual form mirrors the algebra: ``pred(arg, ...)`` atoms with
``?x`` variables, ``in_past``/``in_present``/``in_future`` time values
and ``<< formula >>_{a b}^{c d}`` abstracted terms (subscript = alpha,
superscript = beta, both optional; a missing subscript defaults alpha
to all free variables of the body).  Connectives are ``/\\{(i,j),...}``
for the indexed conjunction, ``~`` for negation, ``E{n}`` for the
positional quantifier, infix ``=`` for identity and the constant
``Top``.  ``serialize`` in the syntax module is the inverse: parsing
its output recovers the formula structurally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    AbstractedTerm,
    Atom,
    Conj,
    Constant,
    Exists,
    Formula,
    FormulaError,
    Identity,
    Neg,
    TENSES,
    Term,
    TimeValue,
    Top,
    Variable,
    Vocabulary,
    free_var_tuple,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<LABS><<)
  | (?P<RABS>>>)
  | (?P<CONJ>/\\)
  | (?P<QVAR>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<INT>[0-9]+)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>[(),={}^~_])
    """,
    re.VERBOSE,
)

_PUNCT_KINDS = {
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    "=": "EQUALS",
    "{": "LBRACE",
    "}": "RBRACE",
    "^": "CARET",
    "~": "TILDE",
    "_": "UNDERSCORE",
}


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "PUNCT":
            kind = _PUNCT_KINDS[chunk]
        elif kind == "IDENT" and chunk == "_":
            kind = "UNDERSCORE"
        if kind != "WS":
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, vocabulary: Vocabulary):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.vocabulary = vocabulary

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind}, found {tok.text or 'end of input'!r}",
                tok.line,
                tok.col,
            )
        return self.advance()

    def fail(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    def guard(self, build):
        """Run a constructor, converting invariant errors to parse errors."""
        try:
            return build()
        except FormulaError as exc:
            tok = self.peek()
            raise ParseError(str(exc), tok.line, tok.col) from exc

    # -- grammar ------------------------------------------------------------

    def formula(self) -> Formula:
        left = self.unary()
        while self.peek().kind == "CONJ":
            self.advance()
            self.expect("LBRACE")
            pairs = self.pair_list()
            self.expect("RBRACE")
            right = self.unary()
            left = self.guard(lambda: Conj(left, right, pairs))
        return left

    def pair_list(self) -> tuple[tuple[int, int], ...]:
        pairs = []
        while self.peek().kind == "LPAREN":
            self.advance()
            a = int(self.expect("INT").text)
            self.expect("COMMA")
            b = int(self.expect("INT").text)
            self.expect("RPAREN")
            pairs.append((a, b))
            if self.peek().kind == "COMMA":
                self.advance()
        return tuple(pairs)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "TILDE":
            self.advance()
            body = self.unary()
            return Neg(body)
        if tok.kind == "IDENT" and tok.text == "E" and self.peek(1).kind == "LBRACE":
            self.advance()
            self.advance()
            n = int(self.expect("INT").text)
            self.expect("RBRACE")
            body = self.unary()
            return self.guard(lambda: Exists(n, body))
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "LPAREN":
            self.advance()
            f = self.formula()
            self.expect("RPAREN")
            return f
        if tok.kind == "IDENT" and tok.text == "Top":
            self.advance()
            return Top()
        if tok.kind == "IDENT" and self.peek(1).kind == "LPAREN":
            return self.atom()
        if tok.kind in ("QVAR", "IDENT", "LABS"):
            left = self.term()
            self.expect("EQUALS")
            right = self.term()
            return Identity(left, right)
        self.fail(f"expected a formula, found {tok.text or 'end of input'!r}")

    def atom(self) -> Formula:
        name_tok = self.expect("IDENT")
        self.expect("LPAREN")
        args: list[Term] = []
        if self.peek().kind != "RPAREN":
            args.append(self.term())
            while self.peek().kind == "COMMA":
                self.advance()
                args.append(self.term())
        self.expect("RPAREN")
        try:
            pred = self.vocabulary.resolve(name_tok.text, len(args))
        except FormulaError as exc:
            raise ParseError(str(exc), name_tok.line, name_tok.col) from exc
        return self.guard(lambda: Atom(pred, tuple(args)))

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "QVAR":
            self.advance()
            return Variable(tok.text[1:])
        if tok.kind == "IDENT":
            self.advance()
            if tok.text in TENSES:
                return TimeValue(tok.text)
            return Constant(tok.text)
        if tok.kind == "LABS":
            return self.abstraction()
        self.fail(f"expected a term, found {tok.text or 'end of input'!r}")

    def abstraction(self) -> AbstractedTerm:
        self.expect("LABS")
        body = self.formula()
        self.expect("RABS")
        alpha = None
        beta: tuple[Variable, ...] = ()
        if self.peek().kind == "UNDERSCORE":
            self.advance()
            alpha = self.var_list()
        if self.peek().kind == "CARET":
            self.advance()
            beta = self.var_list()
        if alpha is None:
            beta_set = set(beta)
            alpha = tuple(v for v in free_var_tuple(body) if v not in beta_set)
        return self.guard(lambda: AbstractedTerm(body, alpha, beta))

    def var_list(self) -> tuple[Variable, ...]:
        self.expect("LBRACE")
        out = []
        while self.peek().kind in ("IDENT", "QVAR"):
            tok = self.advance()
            out.append(Variable(tok.text.lstrip("?")))
        self.expect("RBRACE")
        return tuple(out)

    def finish(self, value):
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)
        return value


def parse_formula(text: str, vocabulary: Vocabulary) -> Formula:
    """Parse a formula; raises ParseError with line and column on failure."""
    p = _Parser(text, vocabulary)
    return p.finish(p.formula())


def parse_term(text: str, vocabulary: Vocabulary) -> Term:
    p = _Parser(text, vocabulary)
    return p.finish(p.term())
