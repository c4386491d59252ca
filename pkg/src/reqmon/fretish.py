"""Lexer, parser and printer for the structured requirement language.

A requirement is one sentence of the form::

    [in <mode> [mode]] [when|upon <expr> [,]] [the] <component> shall
        [always | never | within <n> ticks] satisfy <expr>

Fields must appear in exactly this order. Expressions use ``!``/``not``,
``&``/``and`` and ``|``/``or`` (tightest first) over comparisons of
arithmetic terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Union

from .errors import LexError, ParseError, ReqmonError
from .expr import (
    CMP_OPS,
    Add,
    And,
    BoolExpr,
    BoolLit,
    Cmp,
    Mul,
    Neg,
    Not,
    NumExpr,
    NumLit,
    Or,
    SignalRef,
    Sub,
    expr_text,
)


class Tok(Enum):
    IDENT = "identifier"
    NUM = "number"
    PLACEHOLDER = "placeholder"
    KW_IN = "in"
    KW_MODE = "mode"
    KW_WHEN = "when"
    KW_UPON = "upon"
    KW_THE = "the"
    KW_SHALL = "shall"
    KW_ALWAYS = "always"
    KW_NEVER = "never"
    KW_WITHIN = "within"
    KW_TICKS = "ticks"
    KW_SATISFY = "satisfy"
    KW_TRUE = "true"
    KW_FALSE = "false"
    AND = "&"
    OR = "|"
    NOT = "!"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "=="
    NE = "!="
    PLUS = "+"
    MINUS = "-"
    STAR = "*"
    LPAREN = "("
    RPAREN = ")"
    COMMA = ","
    EOF = "end of input"


KEYWORDS = {
    "in": Tok.KW_IN,
    "mode": Tok.KW_MODE,
    "when": Tok.KW_WHEN,
    "upon": Tok.KW_UPON,
    "the": Tok.KW_THE,
    "shall": Tok.KW_SHALL,
    "always": Tok.KW_ALWAYS,
    "never": Tok.KW_NEVER,
    "within": Tok.KW_WITHIN,
    "ticks": Tok.KW_TICKS,
    "satisfy": Tok.KW_SATISFY,
    "true": Tok.KW_TRUE,
    "false": Tok.KW_FALSE,
    "and": Tok.AND,
    "or": Tok.OR,
    "not": Tok.NOT,
}

# Longest operators first.
_OPERATORS = [
    ("<=", Tok.LE), (">=", Tok.GE), ("==", Tok.EQ), ("!=", Tok.NE),
    ("<", Tok.LT), (">", Tok.GT), ("&", Tok.AND), ("|", Tok.OR), ("!", Tok.NOT),
    ("+", Tok.PLUS), ("-", Tok.MINUS), ("*", Tok.STAR),
    ("(", Tok.LPAREN), (")", Tok.RPAREN), (",", Tok.COMMA),
]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?")
_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
IDENT_RE = re.compile(r"\A[A-Za-z_][A-Za-z0-9_]*\Z")

_CMP_TOKENS = {Tok.LT: "<", Tok.LE: "<=", Tok.GT: ">", Tok.GE: ">=", Tok.EQ: "==", Tok.NE: "!="}
assert set(_CMP_TOKENS.values()) == set(CMP_OPS)


class Token(NamedTuple):
    kind: Tok
    text: str
    line: int
    col: int


def tokenize(source: str, line: int = 1, col: int = 1) -> list[Token]:
    """Split ``source`` into tokens; ``line``/``col`` locate its first character."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            text = m.group()
            tokens.append(Token(KEYWORDS.get(text, Tok.IDENT), text, line, col))
        elif (m := _NUM_RE.match(source, i)):
            text = m.group()
            if _IDENT_RE.match(source, m.end()):
                raise LexError(f"malformed number {source[i:m.end() + 1]!r}", line, col)
            tokens.append(Token(Tok.NUM, text, line, col))
        elif (m := _PLACEHOLDER_RE.match(source, i)):
            tokens.append(Token(Tok.PLACEHOLDER, m.group(1), line, col))
        else:
            for text, kind in _OPERATORS:
                if source.startswith(text, i):
                    tokens.append(Token(kind, text, line, col))
                    i += len(text)
                    col += len(text)
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", line, col)
            continue
        i = m.end()
        col += len(m.group())
    return tokens


# ---------------------------------------------------------------------------
# Requirement structure


@dataclass(frozen=True)
class Global:
    pass


@dataclass(frozen=True)
class InMode:
    mode: str


Scope = Union[Global, InMode]


@dataclass(frozen=True)
class Condition:
    expr: BoolExpr
    flavor: str = "when"  # "when" | "upon"


@dataclass(frozen=True)
class Always:
    pass


@dataclass(frozen=True)
class Never:
    pass


@dataclass(frozen=True)
class Within:
    ticks: int

    def __post_init__(self) -> None:
        if self.ticks < 1:
            raise ValueError("within bound must be at least 1 tick")


Timing = Union[Always, Never, Within]


@dataclass(frozen=True)
class Requirement:
    id: str
    scope: Scope
    condition: Condition | None
    component: str
    timing: Timing
    response: BoolExpr
    source_text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.component):
            raise ValueError(f"component must be an identifier, got {self.component!r}")


# ---------------------------------------------------------------------------
# Parser

PlaceholderResolver = Callable[[Token], NumExpr]


class _Parser:
    def __init__(self, tokens: list[Token], eof: Token, resolve: PlaceholderResolver | None):
        self.toks = tokens + [eof]
        self.pos = 0
        self.expected: set[str] = set()
        self.resolve = resolve

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def check(self, *kinds: Tok) -> bool:
        self.expected.update(k.value for k in kinds)
        return self.tok.kind in kinds

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        self.expected = set()
        return t

    def expect(self, kind: Tok) -> Token:
        if not self.check(kind):
            self.fail()
        return self.advance()

    def fail(self, message: str | None = None, at: Token | None = None):
        t = at or self.tok
        if message is None:
            found = "end of input" if t.kind is Tok.EOF else repr(t.text)
            message = f"unexpected {found}"
            raise ParseError(message, t.line, t.col, frozenset(self.expected))
        raise ParseError(message, t.line, t.col)

    # -- requirement --------------------------------------------------------

    def requirement(self, req_id: str, source: str) -> Requirement:
        scope: Scope = Global()
        if self.check(Tok.KW_IN):
            self.advance()
            scope = InMode(self.expect(Tok.IDENT).text)
            if self.check(Tok.KW_MODE):
                self.advance()
        condition = None
        if self.check(Tok.KW_WHEN, Tok.KW_UPON):
            flavor = self.advance().text
            condition = Condition(self.bool_expr(), flavor)
            if self.check(Tok.COMMA):
                self.advance()
        if self.check(Tok.KW_THE):
            self.advance()
        component = self.expect(Tok.IDENT).text
        self.expect(Tok.KW_SHALL)
        timing: Timing = Always()
        if self.check(Tok.KW_ALWAYS):
            self.advance()
        elif self.check(Tok.KW_NEVER):
            self.advance()
            timing = Never()
        elif self.check(Tok.KW_WITHIN):
            self.advance()
            num = self.expect(Tok.NUM)
            if not num.text.isdigit() or int(num.text) < 1:
                self.fail("deadline must be a positive integer number of ticks", num)
            timing = Within(int(num.text))
            self.expect(Tok.KW_TICKS)
        self.expect(Tok.KW_SATISFY)
        response = self.bool_expr()
        self.expect(Tok.EOF)
        return Requirement(req_id, scope, condition, component, timing, response, source)

    # -- expressions --------------------------------------------------------

    def bool_expr(self) -> BoolExpr:
        start = self.tok
        return self.need_bool(self.or_expr(), start)

    def need_bool(self, node, at: Token) -> BoolExpr:
        if isinstance(node, (NumLit, Neg, Add, Sub, Mul)):
            self.fail("expected a boolean expression, found a numeric one", at)
        return node

    def need_num(self, node, at: Token) -> NumExpr:
        if isinstance(node, (BoolLit, Cmp, Not, And, Or)):
            self.fail("expected a numeric expression, found a boolean one", at)
        return node

    def or_expr(self):
        start = self.tok
        lhs = self.and_expr()
        while self.check(Tok.OR):
            self.advance()
            rstart = self.tok
            rhs = self.and_expr()
            lhs = Or(self.need_bool(lhs, start), self.need_bool(rhs, rstart))
        return lhs

    def and_expr(self):
        start = self.tok
        lhs = self.not_expr()
        while self.check(Tok.AND):
            self.advance()
            rstart = self.tok
            rhs = self.not_expr()
            lhs = And(self.need_bool(lhs, start), self.need_bool(rhs, rstart))
        return lhs

    def not_expr(self):
        if self.check(Tok.NOT):
            self.advance()
            start = self.tok
            return Not(self.need_bool(self.not_expr(), start))
        return self.cmp_expr()

    def cmp_expr(self):
        start = self.tok
        lhs = self.add_expr()
        if self.check(*_CMP_TOKENS):
            op = _CMP_TOKENS[self.advance().kind]
            rstart = self.tok
            rhs = self.add_expr()
            lhs = Cmp(op, self.need_num(lhs, start), self.need_num(rhs, rstart))
            if self.tok.kind in _CMP_TOKENS:
                self.fail("comparison operators do not chain")
        return lhs

    def add_expr(self):
        start = self.tok
        lhs = self.mul_expr()
        while self.check(Tok.PLUS, Tok.MINUS):
            cls = Add if self.advance().kind is Tok.PLUS else Sub
            rstart = self.tok
            rhs = self.mul_expr()
            lhs = cls(self.need_num(lhs, start), self.need_num(rhs, rstart))
        return lhs

    def mul_expr(self):
        start = self.tok
        lhs = self.unary_expr()
        while self.check(Tok.STAR):
            self.advance()
            rstart = self.tok
            rhs = self.unary_expr()
            lhs = Mul(self.need_num(lhs, start), self.need_num(rhs, rstart))
        return lhs

    def unary_expr(self):
        if self.check(Tok.MINUS):
            self.advance()
            start = self.tok
            return Neg(self.need_num(self.unary_expr(), start))
        return self.primary()

    def primary(self):
        if self.check(Tok.NUM):
            return NumLit(float(self.advance().text))
        if self.check(Tok.IDENT):
            return SignalRef(self.advance().text)
        if self.check(Tok.KW_TRUE, Tok.KW_FALSE):
            return BoolLit(self.advance().kind is Tok.KW_TRUE)
        if self.tok.kind is Tok.PLACEHOLDER:
            tok = self.advance()
            if self.resolve is None:
                self.fail(f"unbound placeholder {{{tok.text}}}", tok)
            return self.resolve(tok)
        if self.check(Tok.LPAREN):
            self.advance()
            inner = self.or_expr()
            self.expect(Tok.RPAREN)
            return inner
        self.fail()


def _eof_token(source: str, line: int, col: int) -> Token:
    for ch in source:
        if ch == "\n":
            line, col = line + 1, 1
        else:
            col += 1
    return Token(Tok.EOF, "", line, col)


def parse_requirement(
    source: str,
    id: str = "REQ-1",
    *,
    line: int = 1,
    col: int = 1,
    resolve: PlaceholderResolver | None = None,
) -> Requirement:
    """Parse one requirement sentence.

    ``resolve`` turns ``{NAME}`` placeholder tokens into numeric expressions;
    without it a placeholder is a parse error.
    """
    tokens = tokenize(source, line, col)
    parser = _Parser(tokens, _eof_token(source, line, col), resolve)
    return parser.requirement(id, source)


def parse_expr(source: str) -> BoolExpr:
    """Parse a standalone boolean expression."""
    parser = _Parser(tokenize(source), _eof_token(source, 1, 1), None)
    e = parser.bool_expr()
    parser.expect(Tok.EOF)
    return e


def print_requirement(req: Requirement) -> str:
    parts: list[str] = []
    if isinstance(req.scope, InMode):
        parts.append(f"in {req.scope.mode} mode")
    if req.condition is not None:
        parts.append(f"{req.condition.flavor} {expr_text(req.condition.expr)},")
    parts.append(f"the {req.component} shall")
    if isinstance(req.timing, Always):
        parts.append("always")
    elif isinstance(req.timing, Never):
        parts.append("never")
    else:
        parts.append(f"within {req.timing.ticks} ticks")
    parts.append(f"satisfy {expr_text(req.response)}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# .frt files

_LABEL_RE = re.compile(r"\s*([A-Za-z][A-Za-z0-9_.-]*)\s*:")


class DuplicateRequirementId(ReqmonError):
    pass


def parse_requirements_file(text: str) -> list[Requirement]:
    """Parse a requirements file: one sentence per line, optional ``ID:`` label.

    Unlabelled lines get ``REQ-<n>``, where n is the 1-based position of the
    line among the file's requirements.
    """
    reqs: list[Requirement] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        m = _LABEL_RE.match(body)
        if m:
            req_id = m.group(1)
            offset = m.end()
        else:
            req_id = f"REQ-{len(reqs) + 1}"
            offset = 0
        rest = body[offset:]
        lead = len(rest) - len(rest.lstrip())
        source = rest.strip()
        if req_id in seen:
            raise DuplicateRequirementId(f"line {lineno}: duplicate requirement id {req_id!r}")
        seen.add(req_id)
        reqs.append(parse_requirement(source, req_id, line=lineno, col=offset + lead + 1))
    return reqs
