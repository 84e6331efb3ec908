"""Arithmetic terms: structure, interval evaluation and printing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable

from .interval import (
    EMPTY,
    ENTIRE,
    Box,
    Interval,
    decimal_interval,
    iabs,
    iadd,
    icos,
    idiv,
    iexp,
    ilog,
    imul,
    ineg,
    ipow,
    isin,
    isqr,
    isqrt,
    isub,
    iv,
)

FUNCTIONS = ("sqrt", "abs", "sin", "cos", "exp", "log")


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    lo: float
    hi: float
    text: str | None = None

    @classmethod
    def parse(cls, text: str) -> Const:
        lo, hi = decimal_interval(text)
        return cls(lo, hi, text)

    @classmethod
    def exact(cls, value: float) -> Const:
        return cls(float(value), float(value), None)

    @property
    def value(self) -> float:
        """Nearest float to the written literal (or the exact value)."""
        if self.text is not None:
            return float(Fraction(self.text))
        return self.lo


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Div(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Pow(Term):
    base: Term
    exp: int


@dataclass(frozen=True)
class Call(Term):
    fn: str
    arg: Term

    def __post_init__(self) -> None:
        if self.fn not in FUNCTIONS:
            raise ValueError(f"unknown function {self.fn!r}")


def variables(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, (Neg, Call)):
        return variables(t.arg)
    if isinstance(t, Pow):
        return variables(t.base)
    return variables(t.left) | variables(t.right)


_UNARY = {
    "sqrt": isqrt,
    "abs": iabs,
    "sin": isin,
    "cos": icos,
    "exp": iexp,
    "log": ilog,
}
_BINARY = {Add: iadd, Sub: isub, Mul: imul, Div: idiv}

Evaluator = Callable[[dict], Interval]


def compile_term(t: Term) -> Evaluator:
    """Turn ``t`` into a closure over a name->interval mapping.

    Missing names evaluate to the whole line.  A product of a term with an
    identical copy of itself is evaluated as a square, which is exact in
    the sense that both describe the same real function.
    """
    if isinstance(t, Var):
        name = t.name
        return lambda env: env.get(name, ENTIRE)
    if isinstance(t, Const):
        c = iv(t.lo, t.hi)
        return lambda env: c
    if isinstance(t, Neg):
        f = compile_term(t.arg)
        return lambda env: ineg(f(env))
    if isinstance(t, Pow):
        f = compile_term(t.base)
        n = t.exp
        if n == 2:
            return lambda env: isqr(f(env))
        return lambda env: ipow(f(env), n)
    if isinstance(t, Call):
        f = compile_term(t.arg)
        op = _UNARY[t.fn]
        return lambda env: op(f(env))
    if isinstance(t, Mul) and t.left == t.right:
        f = compile_term(t.left)
        return lambda env: isqr(f(env))
    op = _BINARY[type(t)]
    f = compile_term(t.left)
    g = compile_term(t.right)
    return lambda env: op(f(env), g(env))


def eval_term(t: Term, box: Box) -> Interval:
    """Interval enclosure of ``t`` over ``box``.

    Partial functions are evaluated on the intersection with their domain;
    the result is EMPTY when ``box`` is empty or ``t`` is nowhere defined.
    """
    if box.is_empty:
        return EMPTY
    return compile_term(t)(box.data)


def eval_point(t: Term, env: dict):
    """Floating-point value of ``t``; works elementwise on numpy arrays."""
    import numpy as np

    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Neg):
        return -eval_point(t.arg, env)
    if isinstance(t, Pow):
        base = eval_point(t.base, env)
        if t.exp < 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                return 1.0 / np.power(base, -t.exp)
        return np.power(base, t.exp)
    if isinstance(t, Call):
        a = eval_point(t.arg, env)
        with np.errstate(invalid="ignore", divide="ignore"):
            return getattr(np, "absolute" if t.fn == "abs" else t.fn)(a)
    a = eval_point(t.left, env)
    b = eval_point(t.right, env)
    if isinstance(t, Add):
        return a + b
    if isinstance(t, Sub):
        return a - b
    if isinstance(t, Mul):
        return a * b
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.divide(a, b)


# -- printing ----------------------------------------------------------------


def format_float(x: float) -> str:
    """Decimal text that parses back to exactly ``x``."""
    if math.isinf(x):
        raise ValueError("cannot print an infinite bound")
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    r = repr(x)
    if Fraction(r) == Fraction(x):
        return r
    return str(Decimal(x))


_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(t: Term) -> int:
    if isinstance(t, (Add, Sub)):
        return _PREC_ADD
    if isinstance(t, (Mul, Div)):
        return _PREC_MUL
    if isinstance(t, Neg):
        return _PREC_UNARY
    if isinstance(t, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(t: Term, need: int) -> str:
    s = term_text(t)
    return f"({s})" if _prec(t) < need else s


def term_text(t: Term) -> str:
    """Infix text for ``t`` that the parser reads back to the same tree."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        if t.text is not None:
            return t.text
        if t.lo != t.hi or t.lo < 0:
            raise ValueError(f"constant {t!r} has no literal form")
        return format_float(t.lo)
    if isinstance(t, Neg):
        return "-" + _wrap(t.arg, _PREC_UNARY)
    if isinstance(t, Pow):
        return f"{_wrap(t.base, _PREC_ATOM)}^{t.exp}"
    if isinstance(t, Call):
        return f"{t.fn}({term_text(t.arg)})"
    sym = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(t)]
    p = _prec(t)
    # operators are left associative: the right operand needs strictly
    # higher precedence to print without parentheses
    return f"{_wrap(t.left, p)} {sym} {_wrap(t.right, p + 1)}"
