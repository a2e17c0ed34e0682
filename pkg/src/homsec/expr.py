"""Scalar expressions in patch coordinates.

A tiny expression language: a recursive-descent parser, a vectorised
evaluator and exact symbolic partial derivatives.  Every component
function of every tensor field in the package is an :class:`Expr`.

Grammar (precedence low to high)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ['-'] atom ['^' integer]
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

``-x^2`` reads as ``-(x^2)``.  Builtins: sin, cos, exp, log, sqrt.

Nodes are immutable.  Constructors fold constants and drop neutral
elements (``0 + e``, ``1 * e``) so that repeated differentiation does not
drag dead subtrees along; no further simplification is attempted.
"""
from __future__ import annotations

import math
import re
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Sym",
    "Neg",
    "Add",
    "Mul",
    "Div",
    "Pow",
    "Func",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "DomainError",
    "BUILTINS",
    "parse",
    "evaluate",
    "diff",
    "to_string",
    "const",
    "as_expr",
    "ZERO",
    "ONE",
    "fold",
    "same",
    "total",
    "free_symbols",
]

BUILTINS = ("sin", "cos", "exp", "log", "sqrt")

Number = Union[int, float]


class ExprError(Exception):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    """Source text does not match the grammar.

    ``offset`` is a byte offset into the UTF-8 encoded source and
    ``expected`` the set of tokens that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at byte {offset}" + (f" (expected one of: {exp})" if exp else ""))


class UnknownIdentifierError(ExprSyntaxError):
    """Identifier is neither a declared coordinate nor a builtin function."""


class DomainError(ExprError):
    """Evaluation left the domain of a partial operation."""

    def __init__(self, message: str, subexpr: "Expr"):
        self.subexpr = subexpr
        super().__init__(f"{message}: {to_string(subexpr)}")


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    # operator sugar routes through the folding constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        return power(self, n)

    def __str__(self) -> str:
        return to_string(self)

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def is_const(self) -> bool:
        return False


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        value = float(value)
        if not math.isfinite(value):
            raise ExprError(f"non-finite literal {value!r}")
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self):
        return f"Num({self.value!r})"

    @property
    def is_zero(self) -> bool:
        return self.value == 0.0

    @property
    def is_const(self) -> bool:
        return True


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self):
        return f"Sym({self.name!r})"


class _Node(Expr):
    __slots__ = ("args",)

    def __init__(self, *args):
        object.__setattr__(self, "args", tuple(args))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self.args))})"


class Neg(_Node):
    __slots__ = ()


class Add(_Node):
    __slots__ = ()


class Mul(_Node):
    __slots__ = ()


class Div(_Node):
    __slots__ = ()


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", int(exponent))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in BUILTINS:
            raise ExprError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


ZERO = Num(0.0)
ONE = Num(1.0)


def const(value: Number) -> Num:
    if value == 0:
        return ZERO
    if value == 1:
        return ONE
    return Num(value)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.integer, np.floating)):
        return const(float(value))
    raise TypeError(f"cannot coerce {type(value).__name__} to Expr")


# ---------------------------------------------------------------------------
# folding constructors


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return const(-a.value)
    if isinstance(a, Neg):
        return a.args[0]
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return const(a.value + b.value)
    return Add(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if a.is_zero or b.is_zero:
        return ZERO
    if isinstance(a, Num) and isinstance(b, Num):
        return const(a.value * b.value)
    if isinstance(a, Num):
        if a.value == 1.0:
            return b
        if a.value == -1.0:
            return neg(b)
    if isinstance(b, Num):
        if b.value == 1.0:
            return a
        if b.value == -1.0:
            return neg(a)
        # keep numeric factors on the left
        return Mul(b, a)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num):
        if b.value == 0.0:
            raise ExprError("division by literal zero")
        if b.value == 1.0:
            return a
        return mul(const(1.0 / b.value), a) if isinstance(a, Num) else Div(a, b)
    if a.is_zero:
        return ZERO
    return Div(a, b)


def power(a: Expr, n: int) -> Expr:
    n = int(n)
    if n < 0:
        raise ExprError("negative exponents are not representable; use division")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Num):
        return const(a.value**n)
    return Pow(a, n)


def func(name: str, a: Expr) -> Expr:
    if isinstance(a, Num):
        v = a.value
        if name == "sin" and v == 0.0:
            return ZERO
        if name == "cos" and v == 0.0:
            return ONE
        if name == "exp" and v == 0.0:
            return ONE
        if name == "log" and v == 1.0:
            return ZERO
    return Func(name, a)


def total(terms: Iterable[Expr]) -> Expr:
    """Sum of an iterable of expressions (zero if empty)."""
    out: Expr = ZERO
    for t in terms:
        out = add(out, t)
    return out


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind, text, offset):
        self.kind = kind
        self.text = text
        self.offset = offset


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(source)
    while True:
        while pos < n and source[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}",
                _byte_offset(source, pos),
                {"number", "identifier", "(", "-"},
            )
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), _byte_offset(source, start)))
        pos = m.end()
    tokens.append(_Token("eof", "", len(source.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: Sequence[str] | None):
        self.tokens = _tokenize(source)
        self.i = 0
        self.coords = None if coords is None else frozenset(coords)

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExprSyntaxError(f"unexpected {tok.text or 'end of input'!r}", tok.offset, {op})
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset, {"+", "-", "*", "/", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Add(e, Neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        negate = False
        if self.peek().kind == "op" and self.peek().text == "-":
            self.take()
            negate = True
        e = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            tok = self.peek()
            if tok.kind != "num" or not tok.text.isdigit():
                raise ExprSyntaxError("exponent must be a nonnegative integer literal", tok.offset, {"integer"})
            self.take()
            e = Pow(e, int(tok.text))
        return Neg(e) if negate else e

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.take()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in BUILTINS:
                    raise UnknownIdentifierError(f"unknown function {tok.text!r}", tok.offset, BUILTINS)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Func(tok.text, arg)
            if tok.text in BUILTINS:
                raise ExprSyntaxError(f"builtin {tok.text!r} needs an argument", nxt.offset, {"("})
            if self.coords is not None and tok.text not in self.coords:
                raise UnknownIdentifierError(
                    f"unknown identifier {tok.text!r}", tok.offset, sorted(self.coords)
                )
            return Sym(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(
            f"unexpected {tok.text or 'end of input'!r}", tok.offset, {"number", "identifier", "("}
        )


def parse(source: str, coords: Sequence[str] | None = None) -> Expr:
    """Parse ``source`` into an expression tree.

    If ``coords`` is given, identifiers other than those names (and the
    builtin functions applied to an argument) are rejected.  The returned
    tree mirrors the grammar exactly; no folding is applied.
    """
    if not isinstance(source, str):
        raise TypeError("source must be str")
    return _Parser(source, coords).parse()


# ---------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, Add):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num):
        return _PREC_ATOM if e.value >= 0 else _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_string(e: Expr) -> str:
    """Render ``e`` in the input grammar; ``parse(to_string(e))`` evaluates like ``e``."""
    if isinstance(e, Num):
        text = _num_text(abs(e.value))
        return text if e.value >= 0 else f"(-{text})"
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) < _PREC_ATOM:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Neg):
        inner = to_string(e.args[0])
        if _prec(e.args[0]) < _PREC_POW or isinstance(e.args[0], Pow):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Add):
        a, b = e.args
        left = to_string(a)
        if isinstance(b, Neg):
            inner = b.args[0]
            right = to_string(inner)
            if _prec(inner) <= _PREC_ADD or (isinstance(inner, Num) and inner.value < 0):
                right = f"({right})"
            return f"{left} - {right}"
        right = to_string(b)
        if _prec(b) <= _PREC_ADD or _prec(b) == _PREC_NEG:
            right = f"({right})"
        return f"{left} + {right}"
    if isinstance(e, (Mul, Div)):
        a, b = e.args
        op = " * " if isinstance(e, Mul) else " / "
        left = to_string(a)
        if _prec(a) < _PREC_MUL:
            left = f"({left})"
        right = to_string(b)
        if _prec(b) <= _PREC_MUL:
            right = f"({right})"
        return left + op + right
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

Env = Mapping[str, Union[float, np.ndarray]]


def evaluate(e: Expr, env: Env) -> np.ndarray | float:
    """Evaluate ``e`` with coordinates bound by ``env``.

    ``env`` values may be floats or equally shaped numpy arrays, in which
    case the result is an array of the same shape.  Raises
    :class:`DomainError` for division by zero, ``log`` of a nonpositive
    value, ``sqrt`` of a negative value or a non-finite result.
    """
    memo: dict[int, object] = {}
    return _eval(e, env, memo)


def _bad(mask) -> bool:
    return bool(np.any(mask))


def _eval(e: Expr, env: Env, memo: dict):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Num):
        out = e.value
    elif isinstance(e, Sym):
        try:
            out = env[e.name]
        except KeyError:
            raise DomainError("unbound coordinate", e) from None
    elif isinstance(e, Neg):
        out = -_eval(e.args[0], env, memo)
    elif isinstance(e, Add):
        out = _eval(e.args[0], env, memo) + _eval(e.args[1], env, memo)
    elif isinstance(e, Mul):
        out = _eval(e.args[0], env, memo) * _eval(e.args[1], env, memo)
    elif isinstance(e, Div):
        num = _eval(e.args[0], env, memo)
        den = _eval(e.args[1], env, memo)
        if _bad(np.asarray(den) == 0):
            raise DomainError("division by zero", e)
        out = num / den
    elif isinstance(e, Pow):
        out = _eval(e.base, env, memo) ** e.exponent
    elif isinstance(e, Func):
        u = _eval(e.arg, env, memo)
        if e.name == "log":
            if _bad(np.asarray(u) <= 0):
                raise DomainError("log of nonpositive value", e)
            out = np.log(u)
        elif e.name == "sqrt":
            if _bad(np.asarray(u) < 0):
                raise DomainError("sqrt of negative value", e)
            out = np.sqrt(u)
        else:
            out = getattr(np, e.name)(u)
    else:
        raise TypeError(f"not an Expr: {e!r}")
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite value", e)
    memo[key] = out
    # keep e alive for the lifetime of memo so ids stay unique
    memo[("keep", key)] = e
    return out


# ---------------------------------------------------------------------------
# differentiation


def diff(e: Expr, coord: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the coordinate ``coord``."""
    memo: dict[int, Expr] = {}
    keep: list[Expr] = []
    return _diff(e, coord, memo, keep)


def _diff(e: Expr, x: str, memo: dict, keep: list) -> Expr:
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Num):
        out = ZERO
    elif isinstance(e, Sym):
        out = ONE if e.name == x else ZERO
    elif isinstance(e, Neg):
        out = neg(_diff(e.args[0], x, memo, keep))
    elif isinstance(e, Add):
        out = add(_diff(e.args[0], x, memo, keep), _diff(e.args[1], x, memo, keep))
    elif isinstance(e, Mul):
        a, b = e.args
        out = add(mul(_diff(a, x, memo, keep), b), mul(a, _diff(b, x, memo, keep)))
    elif isinstance(e, Div):
        a, b = e.args
        da = _diff(a, x, memo, keep)
        db = _diff(b, x, memo, keep)
        if db.is_zero:
            out = div(da, b)
        else:
            out = div(add(mul(da, b), neg(mul(a, db))), power(b, 2))
    elif isinstance(e, Pow):
        du = _diff(e.base, x, memo, keep)
        out = mul(mul(const(e.exponent), power(e.base, e.exponent - 1)), du)
    elif isinstance(e, Func):
        u = e.arg
        du = _diff(u, x, memo, keep)
        if du.is_zero:
            out = ZERO
        elif e.name == "sin":
            out = mul(func("cos", u), du)
        elif e.name == "cos":
            out = neg(mul(func("sin", u), du))
        elif e.name == "exp":
            out = mul(e, du)
        elif e.name == "log":
            out = div(du, u)
        else:  # sqrt
            out = div(du, mul(const(2.0), e))
    else:
        raise TypeError(f"not an Expr: {e!r}")
    memo[key] = out
    keep.append(e)
    return out


def free_symbols(e: Expr) -> set[str]:
    """Names of the coordinates ``e`` depends on syntactically."""
    seen: set[int] = set()
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Sym):
            out.add(node.name)
        elif isinstance(node, _Node):
            stack.extend(node.args)
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, Func):
            stack.append(node.arg)
    return out


def fold(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the folding constructors.

    Applied to a parsed tree this gives the same node layout that the
    operator overloads would have produced, so that printing a folded tree
    and folding the parse of the text reproduces it exactly.
    """
    memo: dict[int, Expr] = {}
    keep: list[Expr] = []

    def go(node: Expr) -> Expr:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, (Num, Sym)):
            out = node
        elif isinstance(node, Neg):
            out = neg(go(node.args[0]))
        elif isinstance(node, Add):
            out = add(go(node.args[0]), go(node.args[1]))
        elif isinstance(node, Mul):
            out = mul(go(node.args[0]), go(node.args[1]))
        elif isinstance(node, Div):
            out = div(go(node.args[0]), go(node.args[1]))
        elif isinstance(node, Pow):
            out = power(go(node.base), node.exponent)
        elif isinstance(node, Func):
            out = func(node.name, go(node.arg))
        else:
            raise TypeError(f"not an Expr: {node!r}")
        memo[id(node)] = out
        keep.append(node)
        return out

    return go(e)


def same(a: Expr, b: Expr) -> bool:
    """Structural equality of two trees (not mathematical equality)."""
    stack = [(a, b)]
    while stack:
        u, v = stack.pop()
        if u is v:
            continue
        if type(u) is not type(v):
            return False
        if isinstance(u, Num):
            if u.value != v.value:
                return False
        elif isinstance(u, Sym):
            if u.name != v.name:
                return False
        elif isinstance(u, Pow):
            if u.exponent != v.exponent:
                return False
            stack.append((u.base, v.base))
        elif isinstance(u, Func):
            if u.name != v.name:
                return False
            stack.append((u.arg, v.arg))
        else:
            stack.extend(zip(u.args, v.args))
    return True
