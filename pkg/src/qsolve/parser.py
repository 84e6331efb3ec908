"""Concrete syntax for constraints.

::

    formula    := quantblock | disj
    quantblock := ("forall" | "exists") binding ("," binding)* "." formula
    binding    := ident "in" "[" num "," num "]"
    disj       := conj ("or" conj)*
    conj       := unit ("and" unit)*
    unit       := "(" formula ")" | "not" unit | quantblock | atom
    atom       := term relop term          relop in <= < >= >

Terms use + - * / ^ (integer exponents), unary minus and the functions
sqrt abs sin cos exp log.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .constraint import And, Atom, Constraint, Or, Quant, check_wellformed, flatten_blocks, opposite
from .interval import Box, Interval, decimal_interval, iv
from .terms import FUNCTIONS, Add, Call, Const, Div, Mul, Neg, Pow, Sub, Term, Var

KEYWORDS = {"forall", "exists", "in", "and", "or", "not"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9']*)
  | (?P<op><=|>=|==|!=|[-+*/^()\[\],.<>=])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int) -> None:
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {line}, column {col}: {message}")
        self.pos = pos
        self.line = line
        self.column = col


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, kw, op, eof
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            word = m.group()
            if kind == "ident" and word in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, word, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


_RELOPS = ("<=", "<", ">=", ">")


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, self.text, tok.pos)

    def accept(self, text: str) -> bool:
        t = self.peek()
        if t.kind in ("op", "kw") and t.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.kind in ("op", "kw") and t.text == text:
            self.i += 1
            return t
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise self.error(f"expected {text!r}, found {found}")

    # formulas
    def formula(self) -> Constraint:
        t = self.peek()
        if t.kind == "kw" and t.text in ("forall", "exists"):
            return self.quantblock()
        return self.disj()

    def quantblock(self) -> Constraint:
        kind = self.peek().text
        self.i += 1
        bindings = [self.binding()]
        while self.accept(","):
            bindings.append(self.binding())
        self.expect(".")
        body = self.formula()
        return Quant(kind, tuple(bindings), body)

    def binding(self) -> tuple[str, Interval]:
        t = self.peek()
        if t.kind != "ident":
            raise self.error("expected a variable name")
        self.i += 1
        self.expect("in")
        self.expect("[")
        lo_tok = self.peek()
        lo = self.signed_number()
        self.expect(",")
        hi = self.signed_number()
        self.expect("]")
        b = iv(decimal_interval(lo).lo, decimal_interval(hi).hi)
        if b.is_empty:
            raise self.error(f"empty bound [{lo}, {hi}] for {t.text}", lo_tok)
        return t.text, b

    def signed_number(self) -> str:
        sign = ""
        if self.accept("-"):
            sign = "-"
        elif self.accept("+"):
            pass
        t = self.peek()
        if t.kind != "num":
            raise self.error("expected a number")
        self.i += 1
        return sign + t.text

    def disj(self) -> Constraint:
        parts = [self.conj()]
        while self.accept("or"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Constraint:
        parts = [self.unit()]
        while self.accept("and"):
            parts.append(self.unit())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unit(self) -> Constraint:
        t = self.peek()
        if t.kind == "kw" and t.text == "not":
            self.i += 1
            return opposite(self.unit())
        if t.kind == "kw" and t.text in ("forall", "exists"):
            return self.quantblock()
        if t.kind == "op" and t.text == "(":
            # either a parenthesised formula or an atom whose left term
            # starts with a parenthesis; try the atom first
            start = self.i
            try:
                return self.atom()
            except ParseError as atom_err:
                atom_stop = self.i
                self.i = start
                try:
                    self.i += 1
                    inner = self.formula()
                    self.expect(")")
                    return inner
                except ParseError as formula_err:
                    raise formula_err if self.i >= atom_stop else atom_err
        return self.atom()

    def atom(self) -> Atom:
        left = self.term()
        t = self.peek()
        if t.kind == "op" and t.text in ("=", "==", "!="):
            raise self.error(
                "equality constraints are not supported; "
                "write abs(f - g) <= eps or (f - g)^2 <= eps instead"
            )
        if not (t.kind == "op" and t.text in _RELOPS):
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise self.error(f"expected a comparison (<=, <, >=, >), found {found}")
        self.i += 1
        right = self.term()
        nxt = self.peek()
        if nxt.kind == "op" and nxt.text in _RELOPS + ("=", "=="):
            raise self.error("chained comparisons are not supported")
        if isinstance(right, Const) and right.lo == 0.0 and right.hi == 0.0:
            return Atom(left, t.text)
        return Atom(Sub(left, right), t.text)

    # terms
    def term(self) -> Term:
        left = self.product()
        while True:
            if self.accept("+"):
                left = Add(left, self.product())
            elif self.accept("-"):
                left = Sub(left, self.product())
            else:
                return left

    def product(self) -> Term:
        left = self.unary()
        while True:
            if self.accept("*"):
                left = Mul(left, self.unary())
            elif self.accept("/"):
                left = Div(left, self.unary())
            else:
                return left

    def unary(self) -> Term:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Term:
        base = self.primary()
        if self.accept("^"):
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = self.accept("(")
        sign = -1 if self.accept("-") else 1
        t = self.peek()
        if t.kind != "num" or not t.text.isdigit():
            raise self.error("exponent must be an integer literal")
        self.i += 1
        if paren:
            self.expect(")")
        return sign * int(t.text)

    def primary(self) -> Term:
        t = self.peek()
        if t.kind == "num":
            self.i += 1
            return Const.parse(t.text)
        if t.kind == "ident":
            self.i += 1
            if self.peek().kind == "op" and self.peek().text == "(":
                if t.text not in FUNCTIONS:
                    raise self.error(f"unknown function {t.text!r}", t)
                self.i += 1
                arg = self.term()
                self.expect(")")
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                raise self.error(f"function {t.text} needs an argument", t)
            return Var(t.text)
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise self.error(f"expected a term, found {found}")


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.peek().kind != "eof":
        raise p.error(f"unexpected {p.peek().text!r}")
    return t


def parse(text: str) -> Constraint:
    """Parse a constraint and normalise quantifier blocks.

    Raises ParseError with line and column on malformed input.
    """
    p = _Parser(text)
    if p.peek().kind == "eof":
        raise p.error("empty input")
    phi = p.formula()
    if p.peek().kind != "eof":
        raise p.error(f"unexpected {p.peek().text!r}")
    phi = flatten_blocks(phi)
    problems = check_wellformed(phi)
    if problems:
        raise ParseError(problems[0], text, 0)
    return phi


_BOX_ITEM = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9']*)\s*=\s*\[\s*([^,\]]+?)\s*,\s*([^\]]+?)\s*\]\s*$")


def parse_box(text: str) -> Box:
    """Read ``x=[a,b];y=[c,d]`` into a box with outward-rounded bounds."""
    out = {}
    for item in text.split(";"):
        if not item.strip():
            continue
        m = _BOX_ITEM.match(item)
        if m is None:
            raise ValueError(f"malformed box entry {item.strip()!r}; expected name=[lo,hi]")
        name, lo, hi = m.groups()
        try:
            b = iv(decimal_interval(lo).lo, decimal_interval(hi).hi)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad number in box entry {item.strip()!r}") from exc
        if b.is_empty:
            raise ValueError(f"empty interval for {name}")
        if name in out:
            raise ValueError(f"variable {name} given twice in box")
        out[name] = b
    if not out:
        raise ValueError("empty box specification")
    return Box(out)


@dataclass
class ProblemFile:
    """A constraint file with its optional header directives."""

    phi: Constraint
    expect: str | None = None
    box: Box | None = None
    epsilon: float | None = None
    name: str = ""


_HEADER = re.compile(r"^\s*#\s*(expect|box|epsilon)\s*:\s*(.*?)\s*$")


def parse_file_text(text: str, name: str = "") -> ProblemFile:
    expect = box = eps = None
    for line in text.splitlines():
        m = _HEADER.match(line)
        if not m:
            continue
        key, val = m.groups()
        if key == "expect":
            if val not in ("true", "false", "pave", "unknown"):
                raise ValueError(f"{name}: bad expect header {val!r}")
            expect = val
        elif key == "box":
            box = parse_box(val)
        else:
            eps = float(val)
    return ProblemFile(parse(text), expect, box, eps, name)


def load_file(path) -> ProblemFile:
    from pathlib import Path

    p = Path(path)
    return parse_file_text(p.read_text(), p.stem)
