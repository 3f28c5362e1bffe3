"""Rational-function expressions for facet-table cells.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := INT | SYMBOL | '(' expr ')'

Symbols are ``l``, ``h``, ``hx`` and ``hy``. Only integer literals exist, so
every evaluation at rational arguments is an exact rational or a pole.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

SYMBOLS = ("hx", "hy", "l", "h")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class PoleError(ZeroDivisionError):
    """Raised when an expression is evaluated at one of its poles."""


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exp: int


Node = Union[Num, Sym, Neg, BinOp, Pow]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
        elif c.isalpha():
            for name in SYMBOLS:
                if text.startswith(name, i):
                    tokens.append(("sym", name, i))
                    i += len(name)
                    break
            else:
                raise ParseError(f"unknown symbol {c!r}", i)
        elif c in "+-*/^()":
            tokens.append((c, c, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end'!r}", tok[2])
        self.pos += 1
        return tok

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "-":
                self.take()
                sign = -1
            return Pow(base, sign * int(self.take("int")[1]))
        return base

    def atom(self) -> Node:
        kind, value, where = self.peek()
        if kind == "int":
            self.take()
            return Num(int(value))
        if kind == "sym":
            self.take()
            return Sym(value)
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        raise ParseError(f"unexpected {value or 'end of input'!r}", where)


def parse(text: str) -> Node:
    """Parse ``text`` into an expression tree."""
    parser = _Parser(text)
    node = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    return node


def evaluate(node: Node, env: Mapping[str, Fraction]) -> Fraction:
    if isinstance(node, Num):
        return Fraction(node.value)
    if isinstance(node, Sym):
        try:
            return Fraction(env[node.name])
        except KeyError:
            raise KeyError(f"no value bound for symbol {node.name!r}") from None
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Pow):
        base = evaluate(node.base, env)
        if base == 0 and node.exp < 0:
            raise PoleError("zero raised to a negative power")
        return base ** node.exp
    left = evaluate(node.left, env)
    right = evaluate(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0:
        raise PoleError("division by zero")
    return left / right


def symbols(node: Node) -> set:
    if isinstance(node, Sym):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Pow)):
        return symbols(node.arg if isinstance(node, Neg) else node.base)
    return symbols(node.left) | symbols(node.right)


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def to_text(node: Node) -> str:
    """Canonical printer; ``parse(to_text(t)) == t`` for every tree."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return "-" + (inner if _prec(node.arg) >= 3 else f"({inner})")
    if isinstance(node, Pow):
        inner = to_text(node.base)
        if _prec(node.base) < 5:
            inner = f"({inner})"
        return f"{inner}^{node.exp}"
    prec = _PREC[node.op]
    left = to_text(node.left)
    right = to_text(node.right)
    if _prec(node.left) < prec:
        left = f"({left})"
    if _prec(node.right) <= prec:
        right = f"({right})"
    return f"{left}{node.op}{right}"


class RationalFunction:
    """A parsed table cell that evaluates exactly at rational parameters."""

    __slots__ = ("tree", "text")

    def __init__(self, text: str):
        self.text = text
        self.tree = parse(text)

    def __call__(self, **env) -> Fraction:
        return evaluate(self.tree, env)

    @property
    def symbols(self) -> set:
        return symbols(self.tree)

    def canonical(self) -> str:
        return to_text(self.tree)

    def __repr__(self):
        return f"RationalFunction({self.text!r})"


def parse_rational_function(text: str) -> RationalFunction:
    return RationalFunction(text)
