"""Recursive-descent parser for polynomial expressions in z1..zN, zb1..zbN.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := rational | var | '(' expr ')' | '-' base

A rational literal is ``digits`` or ``digits/digits``.  Unary minus binds to
a base, so ``-z1^2`` reads as ``(-z1)^2``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .chart import ChartFunction


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


class VariableIndexError(ParseError):
    pass


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    bar: bool
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Neg, BinOp, Pow]

MAX_EXPONENT = 1000

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>zb\d+|z\d+)|(?P<op>[-+*^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, N: int | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.N = N

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or "/" in val:
                raise ParseError("exponent must be a non-negative integer", pos)
            if int(val) > MAX_EXPONENT:
                raise ParseError(f"exponent exceeds {MAX_EXPONENT}", pos)
            node = Pow(node, int(val))
        return node

    def base(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(Fraction(val))
        if kind == "var":
            bar = val.startswith("zb")
            idx = int(val[2:] if bar else val[1:])
            if idx < 1 or (self.N is not None and idx > self.N):
                raise VariableIndexError(f"variable {val} outside 1..{self.N}", pos)
            return Var(bar, idx)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "op" and val == "-":
            return Neg(self.base())
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str, N: int | None = None) -> Node:
    """Parse ``text``; with ``N`` given, variable indices must lie in 1..N."""
    p = _Parser(text, N)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", pos)
    return node


def _is_base(node: Node) -> bool:
    return isinstance(node, (Num, Var, Neg))


def serialize(node: Node) -> str:
    """Text that parses back to the same tree."""
    if isinstance(node, Num):
        v = node.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(node, Var):
        return f"{'zb' if node.bar else 'z'}{node.index}"
    if isinstance(node, Neg):
        inner = serialize(node.operand)
        return "-" + (inner if _is_base(node.operand) else f"({inner})")
    if isinstance(node, Pow):
        inner = serialize(node.base)
        return (inner if _is_base(node.base) else f"({inner})") + f"^{node.exponent}"
    left, right = serialize(node.left), serialize(node.right)
    if node.op == "*":
        if isinstance(node.left, BinOp) and node.left.op != "*":
            left = f"({left})"
        if isinstance(node.right, BinOp):
            right = f"({right})"
        return f"{left}*{right}"
    if isinstance(node.right, BinOp) and node.right.op != "*":
        right = f"({right})"
    return f"{left} {node.op} {right}"


def lower(node: Node, N: int) -> ChartFunction:
    """The polynomial denoted by ``node`` as a ChartFunction on the N-dimensional chart."""
    if isinstance(node, Num):
        return ChartFunction.constant(N, node.value)
    if isinstance(node, Var):
        if node.index > N:
            raise VariableIndexError(f"variable index {node.index} outside 1..{N}", 0)
        return ChartFunction.zbar(N, node.index) if node.bar else ChartFunction.z(N, node.index)
    if isinstance(node, Neg):
        return -lower(node.operand, N)
    if isinstance(node, Pow):
        return lower(node.base, N) ** node.exponent
    a, b = lower(node.left, N), lower(node.right, N)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    return a * b


def parse_function(text: str, N: int) -> ChartFunction:
    return lower(parse(text, N), N)
