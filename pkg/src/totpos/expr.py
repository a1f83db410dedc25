"""Tiny expression language for candidate scalar functions ``F(x)``.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | 'x' | '(' expr ')' | ('exp' | 'log' | 'sqrt') '(' expr ')'

``^`` is right-associative and a leading ``-`` is only allowed directly in
front of a number literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .numkernel import DomainError, _exact_root, is_exact, to_mpf

FUNCTIONS = ("exp", "log", "sqrt")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_]\w*)|(\S))")


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(Fraction(text))
        if kind == "op" and text == "-":
            nkind, ntext, npos = self.take()
            if nkind != "num":
                raise ParseError("unary minus is only allowed before a number", npos)
            return Num(-Fraction(ntext))
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if text == "x":
                return Var()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse_expression(text: str):
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    return _Parser(text).parse()


# printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _num_text(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    den = v.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        raise ValueError(f"{v} has no finite decimal form")
    digits = max(twos, fives)
    scaled = abs(v) * 10 ** digits
    s = str(scaled.numerator).rjust(digits + 1, "0")
    s = f"{s[:-digits]}.{s[-digits:]}"
    return ("-" if v < 0 else "") + s


def _node_prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Num) and node.value < 0:
        return 3  # "-2" binds like a power base, not an atom
    return 4


def to_text(node) -> str:
    """Print with the minimum parentheses needed to re-parse the same tree."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    lp, rp = _node_prec(node.left), _node_prec(node.right)
    if node.op == "^":
        if lp <= 3 and not (isinstance(node.left, Num)):
            left = f"({left})"
        if rp < 3:
            right = f"({right})"
    else:
        if lp < p:
            left = f"({left})"
        if rp <= p:
            right = f"({right})"
    return f"{left}{node.op}{right}"


# evaluation ---------------------------------------------------------------


def _pow(base, exp, prec):
    if is_exact(base) and is_exact(exp):
        if base == 0:
            if exp < 0:
                raise DomainError("0 raised to a negative power")
            return Fraction(0)
        if exp.denominator == 1:
            return Fraction(base) ** exp.numerator
        if base > 0:
            root = _exact_root(Fraction(base), exp.denominator)
            if root is not None:
                return root ** exp.numerator
    if base < 0:
        if is_exact(exp) and Fraction(exp).denominator == 1:
            return to_mpf(base, prec) ** int(exp)
        raise DomainError(f"non-integer power of negative number {base}")
    if base == 0:
        if exp < 0:
            raise DomainError("0 raised to a negative power")
        return mpmath.mpf(0)
    return to_mpf(base, prec) ** to_mpf(exp, prec)


def evaluate(node, x, prec: int = 128):
    """Evaluate at ``x``; rational inside rational operations, mpf otherwise.

    Follows ``0^0 = 0``.  Raises :class:`DomainError` for log/sqrt/division
    outside their domain.
    """
    with mpmath.workprec(prec):
        return _eval(node, x, prec)


def _eval(node, x, prec):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Call):
        a = _eval(node.arg, x, prec)
        if node.name == "exp":
            return mpmath.exp(to_mpf(a, prec))
        if node.name == "log":
            if a <= 0:
                raise DomainError(f"log of non-positive argument {a}")
            if a == 1:
                return Fraction(0) if is_exact(a) else mpmath.mpf(0)
            return mpmath.log(to_mpf(a, prec))
        if a < 0:
            raise DomainError(f"sqrt of negative argument {a}")
        return _pow(a, Fraction(1, 2), prec)
    a = _eval(node.left, x, prec)
    b = _eval(node.right, x, prec)
    exact = is_exact(a) and is_exact(b)
    if node.op == "^":
        return _pow(a, b, prec)
    if not exact:
        a, b = to_mpf(a, prec), to_mpf(b, prec)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if b == 0:
        raise DomainError("division by zero")
    return Fraction(a) / b if exact else a / b
