"""Recursive-descent parser and evaluator for the function expression DSL.

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' number)?
    atom   := number | variable | function '(' expr (',' expr)? ')' | '(' expr ')'

Variables are x1..xn, y1..yn and t; functions are abs, sqrt, exp (unary) and
max (binary).  Exponents are numeric literals (optionally signed).  A leading
sign on an expression is folded into a subtraction from zero, so the AST
stays within the node kinds constant / variable / + - * / pow / abs / max /
sqrt / exp.

Evaluation broadcasts over numpy arrays; the scalar entry point raises
``EvalDomainError`` on division by zero and other non-finite results, while
the batch entry point lets NaN/inf propagate so samplers can mask them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "EvalDomainError",
    "Expr",
    "parse_expr",
    "eval_expr",
    "expr_variables",
]


class ExprError(ValueError):
    """Base class for expression DSL failures; carries a source position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class ArityError(ExprError):
    pass


class EvalDomainError(ArithmeticError):
    """Evaluation produced a non-finite value (division by zero, sqrt of a
    negative, zero to a negative power, overflow)."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x", "y" or "t"
    index: int  # 0-based for x/y; ignored for t


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+", "-", "*", "/"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class Call:
    fn: str  # "abs", "sqrt", "exp" or "max"
    args: tuple["Expr", ...]


Expr = Union[Const, Var, BinOp, Pow, Call]

_FUNCTIONS = {"abs": 1, "sqrt": 1, "exp": 1, "max": 2}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", bad_at)
        if m.group("num") is not None:
            tokens.append(_Token("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(_Token("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(_Token("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)
        return node

    def expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            node: Expr = self.term()
            if tok.text == "-":
                node = BinOp("-", Const(0.0), node)
        else:
            node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            node = Pow(node, self._signed_number())
        return node

    def _signed_number(self) -> float:
        sign = 1.0
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            if tok.text == "-":
                sign = -1.0
            tok = self.peek()
        if tok.kind != "num":
            raise ExprSyntaxError("exponent must be a number", tok.pos)
        self.advance()
        return sign * float(tok.text)

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text in _FUNCTIONS:
                return self._call(tok)
            return self._variable(tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"expected a value, found {tok.text or 'end of input'!r}", tok.pos
        )

    def _call(self, name: _Token) -> Expr:
        arity = _FUNCTIONS[name.text]
        self.expect_op("(")
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.advance()
            args.append(self.expr())
        self.expect_op(")")
        if len(args) != arity:
            raise ArityError(
                f"{name.text} takes {arity} argument(s), got {len(args)}", name.pos
            )
        return Call(name.text, tuple(args))

    def _variable(self, tok: _Token) -> Expr:
        if tok.text == "t":
            return Var("t", 0)
        m = re.fullmatch(r"([xy])(\d+)", tok.text)
        if m:
            index = int(m.group(2))
            if 1 <= index <= self.n:
                return Var(m.group(1), index - 1)
            raise UnknownIdentifierError(
                f"variable {tok.text!r} out of range for n={self.n}", tok.pos
            )
        raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos)


def parse_expr(text: str, n: int) -> Expr:
    """Parse ``text`` over variables x1..xn, y1..yn, t."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _Parser(text, n).parse()


def _eval(node: Expr, x, y, t):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        if node.name == "t":
            return t
        return (x if node.name == "x" else y)[..., node.index]
    if isinstance(node, BinOp):
        lhs = _eval(node.left, x, y, t)
        rhs = _eval(node.right, x, y, t)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        return np.divide(lhs, rhs)
    if isinstance(node, Pow):
        base = _eval(node.base, x, y, t)
        if float(node.exponent).is_integer():
            return np.power(base, node.exponent)
        return np.power(np.asarray(base, dtype=float), node.exponent)
    assert isinstance(node, Call)
    args = [_eval(a, x, y, t) for a in node.args]
    if node.fn == "abs":
        return np.abs(args[0])
    if node.fn == "sqrt":
        return np.sqrt(args[0])
    if node.fn == "exp":
        return np.exp(args[0])
    return np.maximum(args[0], args[1])


def eval_expr(node: Expr, x, y, t, check: bool = False):
    """Evaluate over broadcastable arrays x, y of shape (..., n) and t (...).

    With ``check`` the result is required to be finite everywhere.
    """
    with np.errstate(all="ignore"):
        out = _eval(node, np.asarray(x, dtype=float), np.asarray(y, dtype=float), t)
    if check and not np.all(np.isfinite(out)):
        raise EvalDomainError("expression evaluated to a non-finite value")
    return out


def expr_variables(node: Expr) -> set[str]:
    """Names of the variables appearing in the AST."""
    if isinstance(node, Const):
        return set()
    if isinstance(node, Var):
        return {node.name if node.name == "t" else f"{node.name}{node.index + 1}"}
    if isinstance(node, BinOp):
        return expr_variables(node.left) | expr_variables(node.right)
    if isinstance(node, Pow):
        return expr_variables(node.base)
    assert isinstance(node, Call)
    out: set[str] = set()
    for a in node.args:
        out |= expr_variables(a)
    return out
