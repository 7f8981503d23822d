"""Tiny analytic-expression language for defining radial curves on the fly.

Supports decimal literals, the variable x, the constant pi, + - * /,
power (^ or **, right-associative, binding tighter than unary minus),
parentheses and the functions sin cos tan exp log sqrt abs.  Parse errors
carry the character offset of the problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shells import SampledCurve, make_grid

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


class ExpressionError(ValueError):
    """Parse or evaluation failure, annotated with a character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x" or "pi"


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


@dataclass(frozen=True)
class Expression:
    """Parsed syntax tree plus the original text."""

    root: object
    text: str

    def __call__(self, x):
        return evaluate(self.root, x)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op | lparen | rparen | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ExpressionError(f"bad number literal {lit!r}", i) from None
            tokens.append(_Token("number", lit, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        if ch == "*" and i + 1 < n and text[i + 1] == "*":
            tokens.append(_Token("op", "**", i))
            i += 2
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
            continue
        raise ExpressionError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self):
        node = self.sum()
        tok = self.peek()
        if tok.kind == "rparen":
            raise ExpressionError("unbalanced parentheses", tok.pos)
        if tok.kind != "end":
            raise ExpressionError(f"unexpected {tok.text!r}", tok.pos)
        return node

    def sum(self):
        node = self.product()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Unary("-", self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("^", "**"):
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        tok = self.advance()
        if tok.kind == "number":
            return Num(float(tok.text))
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                opening = self.peek()
                if opening.kind != "lparen":
                    raise ExpressionError(
                        f"function {tok.text!r} needs parentheses", opening.pos
                    )
                self.advance()
                self.depth += 1
                arg = self.sum()
                closing = self.peek()
                if closing.kind != "rparen":
                    raise ExpressionError("unbalanced parentheses", closing.pos)
                self.advance()
                self.depth -= 1
                return Call(tok.text, arg)
            if tok.text in ("x", "pi"):
                return Var(tok.text)
            raise ExpressionError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "lparen":
            self.depth += 1
            node = self.sum()
            closing = self.peek()
            if closing.kind != "rparen":
                raise ExpressionError("unbalanced parentheses", closing.pos)
            self.advance()
            self.depth -= 1
            return node
        if tok.kind == "end" and self.depth > 0:
            raise ExpressionError("unbalanced parentheses", tok.pos)
        if tok.kind in ("end", "rparen"):
            raise ExpressionError("empty operand", tok.pos)
        raise ExpressionError(f"unexpected {tok.text!r}", tok.pos)


def parse(text: str) -> Expression:
    """Parse an expression in the variable x."""
    if not text or not text.strip():
        raise ExpressionError("empty expression", 0)
    return Expression(root=_Parser(text).parse(), text=text)


def evaluate(node, x):
    """Evaluate a syntax tree at x (scalar or array)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return np.pi if node.name == "pi" else x
    if isinstance(node, Unary):
        return -evaluate(node.operand, x)
    if isinstance(node, Call):
        with np.errstate(all="ignore"):
            return FUNCTIONS[node.func](evaluate(node.arg, x))
    if isinstance(node, Binary):
        a = evaluate(node.left, x)
        b = evaluate(node.right, x)
        with np.errstate(all="ignore"):
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return np.divide(a, b)
            if node.op == "^":
                return np.power(a, b)
    raise TypeError(f"unknown node {node!r}")


def format_expression(expr: Expression) -> str:
    """Render the tree back to parseable text."""
    return _format(expr.root)


def _format(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"-({_format(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({_format(node.arg)})"
    if isinstance(node, Binary):
        return f"({_format(node.left)} {node.op} {_format(node.right)})"
    raise TypeError(f"unknown node {node!r}")


def sample(
    expr: Expression,
    r_max: float,
    step: float,
    origin_value: float | None = None,
    label: str = "",
) -> SampledCurve:
    """Evaluate an expression on a regular grid starting at 0.

    origin_value replaces the value at r = 0 when the expression is
    singular there; non-finite values anywhere else are an error.
    """
    r = make_grid(r_max, step)
    with np.errstate(all="ignore"):
        f = np.asarray(expr(r), dtype=float)
    if f.ndim == 0:
        f = np.full_like(r, float(f))
    if not np.isfinite(f[0]):
        if origin_value is None:
            raise ExpressionError("expression is singular at x = 0", 0)
        f[0] = origin_value
    bad = ~np.isfinite(f)
    if np.any(bad):
        where = float(r[np.nonzero(bad)[0][0]])
        raise ExpressionError(f"expression is not finite at x = {where}", 0)
    return SampledCurve(r, f, label=label or expr.text)
