"""Expression trees for symbolic regression.

Grammar of the text form (fully parenthesized infix)::

    expr   := number | var | unary "(" expr ")" | "(" expr binop expr ")"
    var    := "x" digits
    unary  := cos | sin | exp | log10 | abs
    binop  := + | - | * | /

Numbers may carry a leading minus sign and an exponent. ``to_text`` prints
constants with at least 9 significant digits and enough digits to round-trip
the float exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

UNARY_OPS = ("cos", "sin", "exp", "log10", "abs")
BINARY_OPS = ("add", "sub", "mul", "div")
DEFAULT_OPERATORS = UNARY_OPS + BINARY_OPS
# operator set without exp
PROSE_OPERATORS = ("cos", "sin", "log10", "abs") + BINARY_OPS

_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
_FROM_SYMBOL = {v: k for k, v in _SYMBOLS.items()}


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("constants must be finite")


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Expression"

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expression"
    right: "Expression"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


Expression = Union[Const, Var, Unary, Binary]


class ExpressionParseError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


# --------------------------------------------------------------------------- #
# structure

def children(e: Expression) -> tuple:
    if isinstance(e, Unary):
        return (e.child,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    return ()


def complexity(e: Expression) -> int:
    """Total node count."""
    return 1 + sum(complexity(c) for c in children(e))


def depth(e: Expression) -> int:
    return 1 + max((depth(c) for c in children(e)), default=0)


def max_var_index(e: Expression) -> int:
    if isinstance(e, Var):
        return e.index
    return max((max_var_index(c) for c in children(e)), default=-1)


def preorder(e: Expression) -> list:
    """Nodes in preorder; position in the list is the node's address."""
    out = [e]
    for c in children(e):
        out.extend(preorder(c))
    return out


def replace_at(e: Expression, index: int, new: Expression) -> Expression:
    """Return a copy of ``e`` with the preorder node ``index`` replaced by ``new``."""
    if index == 0:
        return new
    index -= 1
    if isinstance(e, Unary):
        return Unary(e.op, replace_at(e.child, index, new))
    if isinstance(e, Binary):
        n_left = complexity(e.left)
        if index < n_left:
            return Binary(e.op, replace_at(e.left, index, new), e.right)
        return Binary(e.op, e.left, replace_at(e.right, index - n_left, new))
    raise IndexError("node index out of range")


def constants(e: Expression) -> list[float]:
    return [n.value for n in preorder(e) if isinstance(n, Const)]


def with_constants(e: Expression, values) -> Expression:
    """Substitute constants in preorder."""
    it = iter(values)

    def sub(node):
        if isinstance(node, Const):
            return Const(float(next(it)))
        if isinstance(node, Unary):
            return Unary(node.op, sub(node.child))
        if isinstance(node, Binary):
            return Binary(node.op, sub(node.left), sub(node.right))
        return node

    return sub(e)


# --------------------------------------------------------------------------- #
# evaluation

def _apply_unary(op, v):
    if op == "cos":
        return np.cos(v)
    if op == "sin":
        return np.sin(v)
    if op == "exp":
        return np.exp(v)
    if op == "log10":
        return np.log10(np.where(v > 0, v, np.nan))
    return np.abs(v)


def _apply_binary(op, a, b):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    return a / np.where(b == 0, np.nan, b)


def _eval(e, X):
    if isinstance(e, Const):
        return np.full(X.shape[0], e.value)
    if isinstance(e, Var):
        return X[:, e.index]
    if isinstance(e, Unary):
        return _apply_unary(e.op, _eval(e.child, X))
    return _apply_binary(e.op, _eval(e.left, X), _eval(e.right, X))


def as_features(X, n_features=None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("features must be a 2-D array of rows")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features per row, got {X.shape[1]}")
    return X


def evaluate(e: Expression, X, n_features=None) -> np.ndarray:
    """Evaluate ``e`` on each feature row.

    Rows where evaluation hits a singularity (division by zero, log10 of a
    non-positive value, overflow) come back as NaN.
    """
    X = as_features(X, n_features)
    if max_var_index(e) >= X.shape[1]:
        raise ValueError(f"expression uses x{max_var_index(e)} but rows have {X.shape[1]} features")
    with np.errstate(all="ignore"):
        out = np.asarray(_eval(e, X), dtype=float)
    out = out.copy()
    out[~np.isfinite(out)] = np.nan
    return out


def evaluate_constant(e: Expression) -> float:
    """Value of a variable-free expression; NaN when it is singular."""
    return float(evaluate(e, np.zeros((1, 0)))[0])


# --------------------------------------------------------------------------- #
# text form

def format_constant(value: float) -> str:
    """At least 9 significant digits, never fewer than needed for an exact round trip."""
    if value == 0:
        return "-0.000000000" if math.copysign(1.0, value) < 0 else "0.000000000"
    mag = math.floor(math.log10(abs(value)))
    if -6 <= mag < 16:
        return np.format_float_positional(value, unique=True, min_digits=max(0, 8 - mag), trim="k")
    return np.format_float_scientific(value, unique=True, min_digits=8)


def to_text(e: Expression) -> str:
    if isinstance(e, Const):
        return format_constant(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Unary):
        return f"{e.op}({to_text(e.child)})"
    return f"({to_text(e.left)} {_SYMBOLS[e.op]} {to_text(e.right)})"


def to_pretty(e: Expression, digits: int = 5, names=None) -> str:
    """Human-facing form with constants rounded to ``digits`` significant digits."""
    if isinstance(e, Const):
        return f"{e.value:.{digits}g}"
    if isinstance(e, Var):
        return names[e.index] if names else f"x{e.index}"
    if isinstance(e, Unary):
        return f"{e.op}({to_pretty(e.child, digits, names)})"
    return f"({to_pretty(e.left, digits, names)} {_SYMBOLS[e.op]} {to_pretty(e.right, digits, names)})"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>x\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[()+\-*/]))"
)


def _tokenize(s: str):
    pos = 0
    tokens = []
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise ExpressionParseError(f"unexpected character {s[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(s)))
    return tokens


class _Parser:
    def __init__(self, s):
        self.tokens = _tokenize(s)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ExpressionParseError(f"expected {want!r}, got {got!r}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.i += 1
            return Const(float(val))
        if kind == "var":
            self.i += 1
            return Var(int(val[1:]))
        if kind == "name":
            if val not in UNARY_OPS:
                raise ExpressionParseError(f"unknown function {val!r}", pos)
            self.i += 1
            self.take("sym", "(")
            child = self.expr()
            self.take("sym", ")")
            return Unary(val, child)
        if kind == "sym" and val == "(":
            self.i += 1
            left = self.expr()
            kind, op, pos = self.peek()
            if kind == "num" and op.startswith("-"):
                # "(a -1)" tokenizes the minus into the number
                raise ExpressionParseError("binary operator must be followed by whitespace", pos)
            if kind != "sym" or op not in _FROM_SYMBOL:
                raise ExpressionParseError(f"expected binary operator, got {op or 'end of input'!r}", pos)
            self.i += 1
            right = self.expr()
            self.take("sym", ")")
            return Binary(_FROM_SYMBOL[op], left, right)
        raise ExpressionParseError(f"unexpected token {val or 'end of input'!r}", pos)


def parse_text(s: str) -> Expression:
    p = _Parser(s)
    e = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ExpressionParseError(f"trailing input {val!r}", pos)
    return e


# --------------------------------------------------------------------------- #
# generation and simplification

def random_leaf(rng: np.random.Generator, n_features: int) -> Expression:
    if n_features > 0 and rng.random() < 0.5:
        return Var(int(rng.integers(n_features)))
    return Const(float(np.round(rng.normal(0.0, 2.0), 6)))


def random_expr(
    rng: np.random.Generator,
    max_size: int,
    n_features: int,
    operators=DEFAULT_OPERATORS,
    max_depth: int = 10,
) -> Expression:
    """Random tree with at most ``max_size`` nodes and ``max_depth`` levels.

    A target size is drawn uniformly from 1..max_size and the tree is grown
    to fill it; the same generator state always yields the same tree.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    unary = [op for op in operators if op in UNARY_OPS]
    binary = [op for op in operators if op in BINARY_OPS]
    target = int(rng.integers(1, max_size + 1))

    def grow(budget, levels):
        choices = []
        if levels > 1 and budget >= 2 and unary:
            choices.append("u")
        if levels > 1 and budget >= 3 and binary:
            choices.append("b")
        if not choices:
            return random_leaf(rng, n_features)
        kind = choices[int(rng.integers(len(choices)))]
        if kind == "u":
            return Unary(unary[int(rng.integers(len(unary)))], grow(budget - 1, levels - 1))
        left_budget = int(rng.integers(1, budget - 1))
        op = binary[int(rng.integers(len(binary)))]
        return Binary(op, grow(left_budget, levels - 1), grow(budget - 1 - left_budget, levels - 1))

    return grow(target, max_depth)


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def fold_constants(e: Expression) -> Expression:
    """Collapse variable-free subtrees into constants and drop ``*1``, ``/1``, ``+0``, ``-0``.

    Singular constant subtrees (e.g. ``log10(-1)``) are left as they are.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Unary):
        child = fold_constants(e.child)
        node = Unary(e.op, child)
    else:
        left, right = fold_constants(e.left), fold_constants(e.right)
        node = Binary(e.op, left, right)
        if e.op == "mul":
            if _is_const(left, 1.0):
                return right
            if _is_const(right, 1.0):
                return left
        elif e.op == "div" and _is_const(right, 1.0):
            return left
        elif e.op == "add":
            if _is_const(left, 0.0):
                return right
            if _is_const(right, 0.0):
                return left
        elif e.op == "sub" and _is_const(right, 0.0):
            return left
    if all(_is_const(c) for c in children(node)):
        value = evaluate_constant(node)
        if math.isfinite(value):
            return Const(value)
    return node
