"""Arithmetic expression language for limit-state functions.

Grammar (left-associative binaries, ``^`` right-associative and binding
tighter than unary minus)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ['-'] power
    power  := atom ['^' factor]
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

Functions: sqrt, exp, ln, sin, cos.  Evaluation is generic over Python
floats, numpy arrays and :class:`~formsens.dual.Dual` numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import dual as _dual
from .dual import Dual
from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifier


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = ("sqrt", "exp", "ln", "sin", "cos")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset into the UTF-8 encoded source


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        if self.tok.text != text:
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(f"{message}, found {found}", t.offset)

    def parse(self):
        if self.tok.kind == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("unexpected token")
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.tok.text == "-":
            self.advance()
            return Neg(self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            if self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise ExpressionSyntaxError(f"unknown function {t.text!r}", t.offset)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                raise ExpressionSyntaxError(f"function {t.text!r} needs an argument", t.offset)
            return Var(t.text)
        if t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail("expected a number, identifier or '('")


def parse(text: str) -> Node:
    return _Parser(text).parse()


def identifiers(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return identifiers(node.operand)
    if isinstance(node, Call):
        return identifiers(node.arg)
    return identifiers(node.left) | identifiers(node.right)


def check_identifiers(node: Node, vocabulary) -> None:
    unknown = sorted(identifiers(node) - set(vocabulary))
    if unknown:
        raise UnknownIdentifier(unknown[0])


def to_text(node: Node) -> str:
    """Fully parenthesised source text; reparses to an equal tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


# evaluation ---------------------------------------------------------------

def _np_checked(fn, x, bad, message):
    if np.any(bad(x)):
        raise DomainError(message)
    return fn(x)


def _apply(func, x):
    if isinstance(x, Dual):
        return {
            "sqrt": _dual.dual_sqrt,
            "exp": _dual.dual_exp,
            "ln": _dual.dual_ln,
            "sin": _dual.dual_sin,
            "cos": _dual.dual_cos,
        }[func](x)
    if func == "sqrt":
        return _np_checked(np.sqrt, x, lambda a: np.asarray(a) < 0, "sqrt of negative value")
    if func == "ln":
        return _np_checked(np.log, x, lambda a: np.asarray(a) <= 0, "ln of non-positive value")
    if func == "exp":
        with np.errstate(over="ignore"):
            return np.exp(x)
    return {"sin": np.sin, "cos": np.cos}[func](x)


def _divide(a, b):
    if isinstance(a, Dual) or isinstance(b, Dual):
        return a / b  # Dual division checks for a zero divisor itself
    if np.any(np.asarray(b) == 0):
        raise DomainError("division by zero")
    return a / b


def _power(a, b):
    if isinstance(a, Dual) or isinstance(b, Dual):
        return a ** b
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any((a_arr < 0) & (b_arr != np.round(b_arr))):
        raise DomainError("negative base with non-integer exponent")
    if np.any((a_arr == 0) & (b_arr < 0)):
        raise DomainError("division by zero in power")
    out = np.power(a_arr, b_arr)
    return out[()] if out.ndim == 0 else out


def evaluate(node: Node, env) -> object:
    """Evaluate ``node`` with identifiers bound by the mapping ``env``."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnknownIdentifier(node.name) from None
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Call):
        return _apply(node.func, evaluate(node.arg, env))
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return _divide(a, b)
    return _power(a, b)
