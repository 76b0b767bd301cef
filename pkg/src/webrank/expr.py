"""Rational expressions over named variables.

Grammar (whitespace is ignored)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-')? atom ('^' nonneg-int)?
    atom   := identifier | rational-literal | '(' expr ')'

Literals are integers or decimals. A quotient of two literals ("3/4") and a
negated literal ("-2") are folded into a single constant, so that printing a
tree and parsing it back gives the same tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .rational import Q, Rational


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class Expr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def evaluate(self, values):
        return evaluate(self, values)

    def diff(self, var: int) -> "Expr":
        return differentiate(self, var)


@dataclass(frozen=True)
class Var(Expr):
    index: int


@dataclass(frozen=True)
class Const(Expr):
    value: Rational


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


Expression = Expr

_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/"}
_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while text[pos:].strip():
        m = _TOKEN.match(text, pos)
        if m is None:
            start = len(text) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.names = {name: i for i, name in enumerate(variables)}
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExpressionSyntaxError(message, self.text, tok[2])

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op_tok = self.take()
            rhs = self.factor()
            if op_tok[1] == "*":
                e = Mul(e, rhs)
            elif isinstance(e, Const) and isinstance(rhs, Const):
                if rhs.value == 0:
                    raise self.error("division by zero literal", op_tok)
                e = Const(e.value / rhs.value)
            else:
                e = Div(e, rhs)
        return e

    def factor(self) -> Expr:
        negate = False
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            negate = True
        e = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "-":
                raise self.error("negative exponent", tok)
            if tok[0] != "num":
                raise self.error("exponent must be a non-negative integer literal", tok)
            if not tok[1].isdigit():
                raise self.error("non-integer exponent", tok)
            self.take()
            e = Pow(e, int(tok[1]))
        if negate:
            e = Const(-e.value) if isinstance(e, Const) else Neg(e)
        return e

    def atom(self) -> Expr:
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return Const(Q(text))
        if kind == "name":
            if text not in self.names:
                raise self.error(f"unknown identifier {text!r}", tok)
            return Var(self.names[text])
        if kind == "op" and text == "(":
            e = self.expr()
            if self.peek()[1] != ")":
                raise self.error("expected ')'")
            self.take()
            return e
        raise self.error(f"unexpected token {text!r}" if text else "unexpected end of input", tok)


def parse_expression(text: str, variables: Sequence[str]) -> Expr:
    """Parse ``text`` over the ordered variable names ``variables``."""
    return _Parser(text, variables).parse()


def _atom_str(e: Expr, names: Sequence[str]) -> str:
    """Render ``e`` so that it parses back as an atom."""
    if isinstance(e, Var):
        return names[e.index]
    if isinstance(e, Const):
        if e.value >= 0 and e.value.denominator == 1:
            return str(e.value)
        return f"({e.value})"
    return "(" + format_expression(e, names) + ")"


def _factor_str(e: Expr, names: Sequence[str]) -> str:
    if isinstance(e, Pow):
        return f"{_atom_str(e.base, names)}^{e.exponent}"
    if isinstance(e, Neg):
        inner = e.arg
        if isinstance(inner, Pow) or (isinstance(inner, Var)):
            return "-" + _factor_str(inner, names)
        return "-" + _atom_str(inner, names)
    return _atom_str(e, names)


def format_expression(e: Expr, names: Sequence[str]) -> str:
    """Serialize with the minimal parentheses that keep the tree shape."""
    kind = type(e)
    if kind in _BINARY:
        prec = _PREC[kind]
        left, right = e.left, e.right
        ls = format_expression(left, names)
        if type(left) in _PREC and _PREC[type(left)] < prec:
            ls = f"({ls})"
        elif type(left) not in _PREC:
            ls = _factor_str(left, names)
        if type(right) in _PREC:
            rs = format_expression(right, names)
            if _PREC[type(right)] <= prec:
                rs = f"({rs})"
        else:
            rs = _factor_str(right, names)
        return f"{ls}{_BINARY[kind]}{rs}"
    if isinstance(e, Const):
        if e.value.denominator == 1 and e.value >= 0:
            return str(e.value)
        return f"({e.value})"
    return _factor_str(e, names)


def evaluate(e: Expr, values):
    """Evaluate with any ring elements supporting +, -, *, / and integer powers.

    ``values[i]`` is the value of variable ``i``. Rationals give point values;
    Jets give truncated Taylor expansions (and composition, when the variables of
    ``e`` are bound to jets of other functions).
    """
    kind = type(e)
    if kind is Var:
        return values[e.index]
    if kind is Const:
        return e.value
    if kind is Add:
        return evaluate(e.left, values) + evaluate(e.right, values)
    if kind is Sub:
        return evaluate(e.left, values) - evaluate(e.right, values)
    if kind is Mul:
        return evaluate(e.left, values) * evaluate(e.right, values)
    if kind is Div:
        return evaluate(e.left, values) / evaluate(e.right, values)
    if kind is Neg:
        return -evaluate(e.arg, values)
    if kind is Pow:
        base = evaluate(e.base, values)
        if e.exponent == 0:
            return base * 0 + 1
        result = base
        for _ in range(e.exponent - 1):
            result = result * base
        return result
    raise TypeError(f"not an expression node: {e!r}")


# -- symbolic differentiation with local constant folding -------------------

_ZERO = Const(Q(0))
_ONE = Const(Q(1))


def _is(e: Expr, value) -> bool:
    return isinstance(e, Const) and e.value == value


def _add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0) or _is(b, 0):
        return _ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Mul(a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return _ZERO
    if _is(b, 1):
        return a
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def _pow(a: Expr, k: int) -> Expr:
    if k == 0:
        return _ONE
    if k == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value**k)
    return Pow(a, k)


def differentiate(e: Expr, var: int) -> Expr:
    """Exact partial derivative with respect to variable ``var``."""
    kind = type(e)
    if kind is Var:
        return _ONE if e.index == var else _ZERO
    if kind is Const:
        return _ZERO
    if kind is Neg:
        return _neg(differentiate(e.arg, var))
    if kind is Add:
        return _add(differentiate(e.left, var), differentiate(e.right, var))
    if kind is Sub:
        return _sub(differentiate(e.left, var), differentiate(e.right, var))
    if kind is Mul:
        da = differentiate(e.left, var)
        db = differentiate(e.right, var)
        return _add(_mul(da, e.right), _mul(e.left, db))
    if kind is Div:
        da = differentiate(e.left, var)
        db = differentiate(e.right, var)
        num = _sub(_mul(da, e.right), _mul(e.left, db))
        return _div(num, _pow(e.right, 2))
    if kind is Pow:
        if e.exponent == 0:
            return _ZERO
        db = differentiate(e.base, var)
        return _mul(_mul(Const(Q(e.exponent)), _pow(e.base, e.exponent - 1)), db)
    raise TypeError(f"not an expression node: {e!r}")


def differentiate_multi(e: Expr, multi_index: Sequence[int]) -> Expr:
    """Apply ``differentiate`` ``multi_index[k]`` times in each variable ``k``."""
    for var, times in enumerate(multi_index):
        for _ in range(times):
            e = differentiate(e, var)
    return e


def variables_used(e: Expr) -> set:
    kind = type(e)
    if kind is Var:
        return {e.index}
    if kind is Const:
        return set()
    if kind in (Neg,):
        return variables_used(e.arg)
    if kind is Pow:
        return variables_used(e.base)
    return variables_used(e.left) | variables_used(e.right)
