"""Recursive-descent parser for polynomial text such as ``2 - z1 - z2``.

Grammar (whitespace is ignored)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*'? factor)*
    factor := atom ('^' uint)*
    atom   := number ['/' number] | 'i' | var | '(' expr ')' | '-' factor

Numbers may carry a decimal point (read exactly).  Variables are ``z1`` ...
``zN``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from ..errors import NonconstantExponent, PolySyntaxError, UnknownVariable
from ..poly import I, GaussianRational, MultiPoly


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object
    minus: bool = False


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>z\d+|[A-Za-z_]+)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    out, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        out.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


def _has_var(node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, (Num, Imag)):
        return False
    if isinstance(node, Neg):
        return _has_var(node.arg)
    if isinstance(node, Pow):
        return _has_var(node.base)
    return _has_var(node.left) or _has_var(node.right)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return PolySyntaxError(msg, self.text, tok.pos)

    def take(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self):
        if self.tok.kind == "eof":
            raise self.error("empty expression")
        node = self.expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        if self.take("-"):
            node = Neg(self.term())
        else:
            self.take("+")
            node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            minus = self.tok.text == "-"
            self.i += 1
            node = Add(node, self.term(), minus)
        return node

    def _starts_factor(self) -> bool:
        t = self.tok
        return t.kind in ("num", "name") or (t.kind == "op" and t.text == "(")

    def term(self):
        node = self.factor()
        while True:
            if self.take("*"):
                node = Mul(node, self.factor())
            elif self._starts_factor():
                node = Mul(node, self.factor())
            else:
                return node

    def factor(self):
        node = self.atom()
        while self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        start = self.tok
        if start.kind == "num" and "." not in start.text:
            self.i += 1
            return int(start.text)
        if start.kind == "eof":
            raise self.error("missing exponent")
        arg = self.atom()
        if _has_var(arg):
            raise NonconstantExponent("exponent must be a constant", self.text, start.pos)
        value = _lower_scalar(arg)
        if value is None or value.im or value.re.denominator != 1 or value.re < 0:
            raise PolySyntaxError("exponent must be a non-negative integer", self.text, start.pos)
        return int(value.re)

    def number(self) -> Fraction:
        t = self.tok
        if t.kind != "num":
            raise self.error("expected a number")
        self.i += 1
        return Fraction(t.text)

    def atom(self):
        t = self.tok
        if t.kind == "num":
            value = self.number()
            if self.take("/"):
                den_tok = self.tok
                den = self.number()
                if den == 0:
                    raise self.error("division by zero", den_tok)
                value = value / den
            if self.tok.kind == "op" and self.tok.text == "/":
                raise self.error("division is only allowed between two number literals")
            return Num(value)
        if t.kind == "name":
            self.i += 1
            if t.text == "i":
                return Imag()
            m = re.fullmatch(r"z([1-9]\d*)", t.text)
            if not m:
                raise UnknownVariable(f"unknown variable {t.text!r}", self.text, t.pos)
            if self.tok.kind == "op" and self.tok.text == "/":
                raise self.error("division is only allowed between two number literals")
            return Var(int(m.group(1)))
        if self.take("("):
            node = self.expr()
            if not self.take(")"):
                raise self.error("expected ')'")
            if self.tok.kind == "op" and self.tok.text == "/":
                raise self.error("division is only allowed between two number literals")
            return node
        if self.take("-"):
            return Neg(self.factor())
        if t.kind == "eof":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {t.text!r}")


def parse_ast(text: str):
    """Parse ``text`` into an AST of Num / Imag / Var / Neg / Add / Mul / Pow nodes."""
    if not isinstance(text, str):
        raise TypeError("polynomial text must be a string")
    return _Parser(text).parse()


def max_var(node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, (Num, Imag)):
        return 0
    if isinstance(node, Neg):
        return max_var(node.arg)
    if isinstance(node, Pow):
        return max_var(node.base)
    return max(max_var(node.left), max_var(node.right))


def _lower_scalar(node) -> GaussianRational | None:
    if _has_var(node):
        return None
    return lower(node, 0).constant_term()


def lower(node, nvars: int) -> MultiPoly:
    """Canonical :class:`MultiPoly` for an AST."""
    if isinstance(node, Num):
        return MultiPoly.constant(nvars, node.value)
    if isinstance(node, Imag):
        return MultiPoly.constant(nvars, I)
    if isinstance(node, Var):
        return MultiPoly.variable(nvars, node.index - 1)
    if isinstance(node, Neg):
        return -lower(node.arg, nvars)
    if isinstance(node, Add):
        a, b = lower(node.left, nvars), lower(node.right, nvars)
        return a - b if node.minus else a + b
    if isinstance(node, Mul):
        return lower(node.left, nvars) * lower(node.right, nvars)
    if isinstance(node, Pow):
        return lower(node.base, nvars) ** node.exp
    raise TypeError(f"not an AST node: {node!r}")


def _check_vars(node, nvars: int, text: str) -> None:
    top = max_var(node)
    if top > nvars:
        pos = text.find(f"z{top}")
        raise UnknownVariable(f"z{top} is out of range for {nvars} variables", text, max(pos, 0))


def parse_poly(text: str, nvars: int | None = None) -> MultiPoly:
    """Parse polynomial text; ``nvars`` defaults to the largest variable index used."""
    node = parse_ast(text)
    if nvars is None:
        nvars = max(1, max_var(node))
    _check_vars(node, nvars, text)
    return lower(node, nvars)


_PREC = {Add: 1, Neg: 1, Mul: 2, Pow: 3}


def _prec(node) -> int:
    if isinstance(node, Num) and (node.value < 0 or node.value.denominator != 1):
        return 2  # a/b binds like a product
    return _PREC.get(type(node), 4)


def to_source(node) -> str:
    """Print an AST so that parsing the result gives the same AST back."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Var):
        return f"z{node.index}"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        return f"-({inner})" if _prec(node.arg) <= 2 else f"-{inner}"
    if isinstance(node, Add):
        left = to_source(node.left)
        right = to_source(node.right)
        if _prec(node.right) <= 1:
            right = f"({right})"
        return f"{left} {'-' if node.minus else '+'} {right}"
    if isinstance(node, Mul):
        left = to_source(node.left)
        right = to_source(node.right)
        if _prec(node.left) < 2 or isinstance(node.left, Num) and node.left.value < 0:
            left = f"({left})"
        if _prec(node.right) <= 2:
            right = f"({right})"
        return f"{left}*{right}"
    if isinstance(node, Pow):
        base = to_source(node.base)
        if _prec(node.base) <= 3:
            base = f"({base})"
        return f"{base}^{node.exp}"
    raise TypeError(f"not an AST node: {node!r}")
