"""Scalar coordinate expressions: parsing, evaluation, finite differences.

The language covers what metric coefficients and mapping components need:
arithmetic with ``+ - * / ^``, a small function table, comparisons,
``and``/``or``, and a first-match ``piecewise``.  Parse errors carry the
byte offset of the offending token so a bad coefficient inside a larger
document can be pinpointed.  Evaluation is strict scalar math; for grid
work :func:`compile_fn` emits a vectorized numpy closure instead.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExprError",
    "EvalError",
    "NonSmoothWarning",
    "Num",
    "Const",
    "Var",
    "Unary",
    "Bin",
    "Cmp",
    "Bool",
    "Call",
    "Piecewise",
    "parse",
    "unparse",
    "free_vars",
    "eval_expr",
    "diff_fd",
    "compile_fn",
]


class ExprError(ValueError):
    """Parse failure.  ``offset`` is the byte position in the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvalError(ValueError):
    """Evaluation failure: unbound name or a domain error."""


class NonSmoothWarning(UserWarning):
    """One-sided differences disagree; the derivative value is suspect."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    """Named constant (``pi``, ``e``); keeps its name through unparse."""

    name: str
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Bool:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Piecewise:
    """First-match conditional: pairs of (condition, value) plus a default."""

    pairs: tuple
    default: object


# name -> (arity or None for 2+, scalar implementation)
_FUNCTIONS = {
    "sin": (1, math.sin),
    "cos": (1, math.cos),
    "tan": (1, math.tan),
    "arctan": (1, math.atan),
    "atan": (1, math.atan),
    "exp": (1, math.exp),
    "log": (1, math.log),
    "sqrt": (1, math.sqrt),
    "cosh": (1, math.cosh),
    "sinh": (1, math.sinh),
    "tanh": (1, math.tanh),
    "abs": (1, abs),
    "min": (None, min),
    "max": (None, max),
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_KEYWORDS = {"and", "or"}

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|==|[-+*/^(),<>=])"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, val, off = self.peek()
        if val != text:
            got = repr(val) if kind != "end" else "end of input"
            raise ExprError(f"expected {text!r}, got {got}", off)
        return self.next()

    def parse(self):
        node = self.or_expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected token {val!r}", off)
        return node

    def or_expr(self):
        node = self.and_expr()
        while self.peek()[1] == "or":
            self.next()
            node = Bool("or", node, self.and_expr())
        return node

    def and_expr(self):
        node = self.cmp_expr()
        while self.peek()[1] == "and":
            self.next()
            node = Bool("and", node, self.cmp_expr())
        return node

    def cmp_expr(self):
        node = self.sum_expr()
        val = self.peek()[1]
        if val in ("<", "<=", "=", "==", ">=", ">"):
            self.next()
            op = "==" if val == "=" else val
            node = Cmp(op, node, self.sum_expr())
        return node

    def sum_expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = Bin(op, node, self.factor())
        return node

    def factor(self):
        if self.peek()[1] == "-":
            self.next()
            return Unary("-", self.factor())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[1] == "^":
            self.next()
            # right associative, and the exponent may carry a sign
            node = Bin("^", node, self.factor())
        return node

    def atom(self):
        kind, val, off = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in _KEYWORDS:
                raise ExprError(f"unexpected keyword {val!r}", off)
            if self.peek()[1] == "(":
                return self.call(val, off)
            if val in _CONSTANTS:
                return Const(val, _CONSTANTS[val])
            return Var(val)
        if val == "(":
            node = self.or_expr()
            self.expect(")")
            return node
        got = repr(val) if kind != "end" else "end of input"
        raise ExprError(f"expected an expression, got {got}", off)

    def call(self, fn: str, off: int):
        self.expect("(")
        args = [self.or_expr()]
        while self.peek()[1] == ",":
            self.next()
            args.append(self.or_expr())
        self.expect(")")
        if fn == "piecewise":
            if len(args) < 3 or len(args) % 2 == 0:
                raise ExprError(
                    "piecewise needs condition/value pairs plus a default", off
                )
            pairs = tuple(zip(args[0:-1:2], args[1:-1:2]))
            return Piecewise(pairs, args[-1])
        if fn not in _FUNCTIONS:
            raise ExprError(f"unknown function {fn!r}", off)
        arity = _FUNCTIONS[fn][0]
        if arity is None:
            if len(args) < 2:
                raise ExprError(f"{fn} needs at least two arguments", off)
        elif len(args) != arity:
            raise ExprError(f"{fn} takes {arity} argument(s), got {len(args)}", off)
        return Call(fn, tuple(args))


def parse(src: str):
    """Parse a source string into an expression tree."""
    return _Parser(src).parse()


_LEVEL_OR = 1
_LEVEL_AND = 2
_LEVEL_CMP = 3
_LEVEL_ADD = 4
_LEVEL_MUL = 5
_LEVEL_UNARY = 6
_LEVEL_POW = 7
_LEVEL_ATOM = 8


def _render(node, level: int) -> str:
    if isinstance(node, Num):
        text = repr(float(node.value))
        if node.value < 0:
            return f"({text})"
        return text
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        text = "-" + _render(node.operand, _LEVEL_UNARY)
        return f"({text})" if level > _LEVEL_UNARY else text
    if isinstance(node, Bin):
        if node.op == "^":
            text = _render(node.left, _LEVEL_POW + 1) + "^" + _render(node.right, _LEVEL_POW)
            own = _LEVEL_POW
        elif node.op in ("*", "/"):
            text = _render(node.left, _LEVEL_MUL) + node.op + _render(node.right, _LEVEL_MUL + 1)
            own = _LEVEL_MUL
        else:
            text = _render(node.left, _LEVEL_ADD) + node.op + _render(node.right, _LEVEL_ADD + 1)
            own = _LEVEL_ADD
        return f"({text})" if level > own else text
    if isinstance(node, Cmp):
        text = _render(node.left, _LEVEL_CMP + 1) + f" {node.op} " + _render(node.right, _LEVEL_CMP + 1)
        return f"({text})" if level > _LEVEL_CMP else text
    if isinstance(node, Bool):
        own = _LEVEL_AND if node.op == "and" else _LEVEL_OR
        text = _render(node.left, own) + f" {node.op} " + _render(node.right, own + 1)
        return f"({text})" if level > own else text
    if isinstance(node, Call):
        return node.fn + "(" + ", ".join(_render(a, 0) for a in node.args) + ")"
    if isinstance(node, Piecewise):
        parts = []
        for cond, value in node.pairs:
            parts.append(_render(cond, 0))
            parts.append(_render(value, 0))
        parts.append(_render(node.default, 0))
        return "piecewise(" + ", ".join(parts) + ")"
    raise TypeError(f"not an expression node: {node!r}")


def unparse(node) -> str:
    """Render a tree back to source; reparsing gives an equal tree."""
    return _render(node, 0)


def free_vars(node) -> set:
    """Names the expression reads (named constants excluded)."""
    out = set()

    def walk(n):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Unary):
            walk(n.operand)
        elif isinstance(n, (Bin, Cmp, Bool)):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Call):
            for a in n.args:
                walk(a)
        elif isinstance(n, Piecewise):
            for cond, value in n.pairs:
                walk(cond)
                walk(value)
            walk(n.default)

    walk(node)
    return out


def _fail(node, reason: str):
    raise EvalError(f"cannot evaluate '{unparse(node)}': {reason}")


def eval_expr(node, bindings: dict) -> float:
    """Strict scalar evaluation.

    Comparisons and boolean connectives yield 1.0 or 0.0.  ``piecewise``
    only evaluates the branch it selects, so guarded expressions like
    ``piecewise(x > 0, log(x), 0)`` are safe.  Domain errors raise
    :class:`EvalError` naming the offending subexpression.
    """
    if isinstance(node, (Num, Const)):
        return float(node.value)
    if isinstance(node, Var):
        try:
            return float(bindings[node.name])
        except KeyError:
            raise EvalError(f"unbound name '{node.name}'") from None
    if isinstance(node, Unary):
        return -eval_expr(node.operand, bindings)
    if isinstance(node, Bin):
        left = eval_expr(node.left, bindings)
        right = eval_expr(node.right, bindings)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right == 0.0:
                _fail(node, "division by zero")
            return left / right
        try:
            return math.pow(left, right)
        except (ValueError, OverflowError) as exc:
            _fail(node, str(exc))
    if isinstance(node, Cmp):
        left = eval_expr(node.left, bindings)
        right = eval_expr(node.right, bindings)
        op = node.op
        if op == "<":
            ok = left < right
        elif op == "<=":
            ok = left <= right
        elif op == "==":
            ok = left == right
        elif op == ">=":
            ok = left >= right
        else:
            ok = left > right
        return 1.0 if ok else 0.0
    if isinstance(node, Bool):
        left = eval_expr(node.left, bindings) != 0.0
        if node.op == "and":
            if not left:
                return 0.0
            return 1.0 if eval_expr(node.right, bindings) != 0.0 else 0.0
        if left:
            return 1.0
        return 1.0 if eval_expr(node.right, bindings) != 0.0 else 0.0
    if isinstance(node, Call):
        args = [eval_expr(a, bindings) for a in node.args]
        fn = _FUNCTIONS[node.fn][1]
        try:
            return float(fn(*args))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            _fail(node, str(exc))
    if isinstance(node, Piecewise):
        for cond, value in node.pairs:
            if eval_expr(cond, bindings) != 0.0:
                return eval_expr(value, bindings)
        return eval_expr(node.default, bindings)
    raise TypeError(f"not an expression node: {node!r}")


def diff_fd(node, name: str, bindings: dict, step: float | None = None) -> float:
    """Central finite difference of the expression along ``name``.

    Emits :class:`NonSmoothWarning` when the forward and backward
    one-sided quotients disagree beyond a relative 1e-3, which catches
    kinks such as ``abs(x)`` at the origin.
    """
    if name not in bindings:
        raise EvalError(f"unbound name '{name}'")
    x = float(bindings[name])
    h = step if step is not None else 1e-5 * max(1.0, abs(x))
    local = dict(bindings)

    def at(value):
        local[name] = value
        return eval_expr(node, local)

    f_plus = at(x + h)
    f_minus = at(x - h)
    f_mid = at(x)
    forward = (f_plus - f_mid) / h
    backward = (f_mid - f_minus) / h
    if abs(forward - backward) > 1e-3 * max(1.0, abs(forward), abs(backward)):
        warnings.warn(
            f"one-sided differences disagree at {name}={x:g}: "
            f"{forward:.6g} vs {backward:.6g}",
            NonSmoothWarning,
            stacklevel=2,
        )
    return (f_plus - f_minus) / (2.0 * h)


_NUMPY_FUNCTIONS = {
    "sin": "_np.sin",
    "cos": "_np.cos",
    "tan": "_np.tan",
    "arctan": "_np.arctan",
    "atan": "_np.arctan",
    "exp": "_np.exp",
    "log": "_np.log",
    "sqrt": "_np.sqrt",
    "cosh": "_np.cosh",
    "sinh": "_np.sinh",
    "tanh": "_np.tanh",
    "abs": "_np.abs",
}


def _codegen(node, names: dict) -> str:
    if isinstance(node, (Num, Const)):
        return repr(float(node.value))
    if isinstance(node, Var):
        if node.name not in names:
            raise EvalError(f"unbound name '{node.name}'")
        return names[node.name]
    if isinstance(node, Unary):
        return f"(-{_codegen(node.operand, names)})"
    if isinstance(node, Bin):
        left = _codegen(node.left, names)
        right = _codegen(node.right, names)
        if node.op == "^":
            return f"_np.power({left}, {right})"
        return f"({left} {node.op} {right})"
    if isinstance(node, Cmp):
        return f"({_codegen(node.left, names)} {node.op} {_codegen(node.right, names)})"
    if isinstance(node, Bool):
        fn = "_np.logical_and" if node.op == "and" else "_np.logical_or"
        return f"{fn}({_codegen(node.left, names)} != 0, {_codegen(node.right, names)} != 0)"
    if isinstance(node, Call):
        args = [_codegen(a, names) for a in node.args]
        if node.fn in ("min", "max"):
            reducer = "_np.minimum" if node.fn == "min" else "_np.maximum"
            text = args[-1]
            for arg in reversed(args[:-1]):
                text = f"{reducer}({arg}, {text})"
            return text
        return f"{_NUMPY_FUNCTIONS[node.fn]}({args[0]})"
    if isinstance(node, Piecewise):
        # nested where realizes first-match; both branches are evaluated,
        # so out-of-domain lanes surface as nan rather than raising
        text = _codegen(node.default, names)
        for cond, value in reversed(node.pairs):
            cond_text = _codegen(cond, names)
            text = f"_np.where(({cond_text}) != 0, {_codegen(value, names)}, {text})"
        return text
    raise TypeError(f"not an expression node: {node!r}")


def compile_fn(node, names):
    """Compile to a vectorized numpy closure over the given coordinates.

    The returned callable takes one array per name (broadcast together)
    and evaluates with IEEE semantics: invalid lanes become nan or inf
    silently instead of raising the way :func:`eval_expr` does.
    """
    if isinstance(node, str):
        node = parse(node)
    names = list(names)
    mapping = {name: f"_a{i}" for i, name in enumerate(names)}
    body = _codegen(node, mapping)
    args = ", ".join(mapping[name] for name in names)
    source = f"def _fn({args}):\n    return ({body})\n"
    namespace = {"_np": np}
    exec(source, namespace)
    compiled = namespace["_fn"]

    def fn(*arrays):
        if len(arrays) != len(names):
            raise EvalError(f"expected {len(names)} arrays, got {len(arrays)}")
        arrs = [np.asarray(a, dtype=float) for a in arrays]
        shape = np.broadcast_shapes(*(a.shape for a in arrs)) if arrs else ()
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out = np.asarray(compiled(*arrs), dtype=float)
        if out.shape != shape:
            out = np.broadcast_to(out, shape)
        return out

    fn.source = source
    return fn
