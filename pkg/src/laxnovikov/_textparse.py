"""Tiny recursive-descent parser for differential-polynomial text.

Accepts both the canonical rendering (``(1/16)*u2 + (3/16)*u^2``) and the
prime notation used in hand-written tables (``(-1/64)(u''''+5u'^2+10uu'')``).
Juxtaposition means multiplication; division is allowed by constants only.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Generic, Protocol, TypeVar

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>u(?:\d+|'*))|(?P<op>[-+*/^()]))")


class _Ring(Protocol):
    def __add__(self, other): ...
    def __sub__(self, other): ...
    def __mul__(self, other): ...
    def __neg__(self): ...


R = TypeVar("R", bound=_Ring)


def tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


def var_order(token: str) -> int:
    rest = token[1:]
    if not rest:
        return 0
    if rest.isdigit():
        return int(rest)
    return len(rest)


class Parser(Generic[R]):
    def __init__(self, text: str, const: Callable[[Fraction], R],
                 var: Callable[[int], R], as_const: Callable[[R], Fraction | None]):
        self.tokens = tokenize(text)
        self.i = 0
        self.const = const
        self.var = var
        self.as_const = as_const

    def parse(self) -> R:
        if not self.tokens:
            raise ValueError("empty expression")
        value = self.expr()
        if self.i != len(self.tokens):
            raise ValueError(f"unexpected token {self.tokens[self.i][1]!r}")
        return value

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> R:
        kind, val = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        value = self.term()
        if sign < 0:
            value = -value
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def term(self) -> R:
        value = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                value = value * self.factor()
            elif kind == "op" and val == "/":
                self.take()
                divisor = self.as_const(self.factor())
                if divisor is None or divisor == 0:
                    raise ValueError("division by a non-constant or zero")
                value = value * self.const(1 / divisor)
            elif kind in ("int", "var") or (kind == "op" and val == "("):
                value = value * self.factor()
            else:
                return value

    def factor(self) -> R:
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val = self.take()
            if kind != "int":
                raise ValueError("exponent must be a nonnegative integer")
            result = self.const(Fraction(1))
            for _ in range(int(val)):
                result = result * base
            return result
        return base

    def atom(self) -> R:
        kind, val = self.take()
        if kind == "int":
            return self.const(Fraction(int(val)))
        if kind == "var":
            return self.var(var_order(val))
        if kind == "op" and val == "(":
            inner = self.expr()
            kind, val = self.take()
            if val != ")":
                raise ValueError("unbalanced parentheses")
            return inner
        raise ValueError(f"unexpected token {val!r}")
