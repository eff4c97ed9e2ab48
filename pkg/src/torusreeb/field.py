"""Scalar fields on the flat torus T^2 = R^2/Z^2.

An analytic field is given by an arithmetic expression in x and y (parsed by
a small recursive-descent parser) and sampled on an N x N periodic grid.
In between grid nodes values are reconstructed by bilinear interpolation,
which is what the level-set tracer assumes, and gradients / Hessians come
from central-difference stencils with periodic wrap.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' factor
    func   := 'sin' | 'cos' | 'exp'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Union

import numpy as np

from .errors import (
    FieldSyntaxError,
    InvalidResolution,
    NonFiniteField,
    NotPeriodic,
)

__all__ = [
    "FieldExpr",
    "GridField",
    "TorusPoint",
    "parse_field_expr",
    "sample_grid",
    "eval_bilinear",
    "read_field_text",
    "write_field_text",
]


def wrap01(v):
    """Reduce coordinates into [0, 1) (works on scalars and arrays)."""
    return np.mod(v, 1.0)


@dataclass(frozen=True)
class TorusPoint:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x) % 1.0)
        object.__setattr__(self, "y", float(self.y) % 1.0)

    def shifted(self, dx: float, dy: float) -> "TorusPoint":
        return TorusPoint(self.x + dx, self.y + dy)


# ---------------------------------------------------------------------------
# Expression AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "AstNode"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "AstNode"
    right: "AstNode"


@dataclass(frozen=True)
class Call:
    func: str  # sin, cos, exp
    arg: "AstNode"


AstNode = Union[Num, Var, Pi, Neg, BinOp, Call]

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


def _eval_node(node: AstNode, x, y):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x if node.name == "x" else y
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Neg):
        return -_eval_node(node.arg, x, y)
    if isinstance(node, Call):
        return _FUNCS[node.func](_eval_node(node.arg, x, y))
    if isinstance(node, BinOp):
        a = _eval_node(node.left, x, y)
        b = _eval_node(node.right, x, y)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return np.divide(a, b)
    raise TypeError(f"unknown AST node {node!r}")


def _format_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def _pretty(node: AstNode, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(node, Num):
        return _format_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Call):
        return f"{node.func}({_pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = _pretty(node.arg, 3)
        text = f"-{inner}"
        # unary minus binds tighter than +/- but looser than a bare factor
        return f"({text})" if parent_prec >= 2 or right_side else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        left = _pretty(node.left, prec, False)
        right = _pretty(node.right, prec, True)
        text = f"{node.op}".join([left, right])
        needs = prec < parent_prec or (prec == parent_prec and right_side)
        return f"({text})" if needs else text
    raise TypeError(f"unknown AST node {node!r}")


@dataclass(frozen=True)
class FieldExpr:
    """A parsed field expression over the torus coordinates x, y."""

    root: AstNode
    text: str = dc_field(default="", compare=False)

    def evaluate(self, x, y):
        """Evaluate at (x, y); accepts scalars or numpy arrays, coords mod 1."""
        return _eval_node(self.root, np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def pretty(self) -> str:
        return _pretty(self.root)


# ---------------------------------------------------------------------------
# Tokenizer / recursive-descent parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"\d+(?:\.\d*)?|\.\d+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expect(self, ch: str):
        if self._peek() != ch:
            raise FieldSyntaxError(f"expected '{ch}'", self.pos)
        self.pos += 1

    def parse(self) -> AstNode:
        node = self.parse_expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise FieldSyntaxError("trailing input", self.pos)
        return node

    def parse_expr(self) -> AstNode:
        node = self.parse_term()
        while self._peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> AstNode:
        node = self.parse_factor()
        while self._peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> AstNode:
        ch = self._peek()
        if ch == "":
            raise FieldSyntaxError("unexpected end of input", self.pos)
        if ch == "-":
            self.pos += 1
            return Neg(self.parse_factor())
        if ch == "(":
            self.pos += 1
            node = self.parse_expr()
            self._expect(")")
            return node
        m = _NUMBER_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Num(float(m.group()))
        m = _IDENT_RE.match(self.text, self.pos)
        if m:
            name = m.group()
            start = self.pos
            self.pos = m.end()
            if name in ("x", "y"):
                return Var(name)
            if name == "pi":
                return Pi()
            if name in _FUNCS:
                self._expect("(")
                node = self.parse_expr()
                self._expect(")")
                return Call(name, node)
            raise FieldSyntaxError(f"unknown identifier '{name}'", start)
        raise FieldSyntaxError(f"unexpected character '{ch}'", self.pos)


def parse_field_expr(text: str) -> FieldExpr:
    """Parse an expression in x, y into a FieldExpr.

    Raises FieldSyntaxError (with a byte offset) on malformed input.
    """
    if not text or not text.strip():
        raise FieldSyntaxError("empty expression", 0)
    root = _Parser(text).parse()
    return FieldExpr(root, text)


# ---------------------------------------------------------------------------
# Sampled periodic grid
# ---------------------------------------------------------------------------

_PROBE_COUNT = 64
# golden-ratio offsets: deterministic, equidistributed probe set
_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_PROBES = np.mod(0.2837 + _PHI * np.arange(_PROBE_COUNT), 1.0)

PERIOD_TOL = 1e-9


def _check_periodicity(source) -> None:
    xs, ys = _PROBES, np.roll(_PROBES, 17)
    base = source.evaluate(xs, ys)
    dx = np.max(np.abs(source.evaluate(xs + 1.0, ys) - base))
    dy = np.max(np.abs(source.evaluate(xs, ys + 1.0) - base))
    worst = max(float(dx), float(dy))
    if worst > PERIOD_TOL:
        raise NotPeriodic(
            f"expression is not 1-periodic (probe mismatch {worst:.3e} > {PERIOD_TOL:.0e})"
        )


class GridField:
    """A scalar field sampled at the N x N torus grid nodes (i/N, j/N).

    ``values[i, j]`` is the sample at x = i/N, y = j/N; indices wrap mod N.
    ``source`` is the analytic expression the grid came from, when there is
    one; exact re-evaluation through it is preferred wherever the O(1/N^2)
    interpolation error matters.
    """

    def __init__(self, values: np.ndarray, source=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InvalidResolution(f"grid must be square, got {values.shape}")
        n = values.shape[0]
        if n < 64 or (n & (n - 1)) != 0:
            raise InvalidResolution(f"resolution must be a power of two >= 64, got {n}")
        if not np.isfinite(values).all():
            raise NonFiniteField("field contains non-finite samples")
        self.n = n
        self.values = values
        self.values.setflags(write=False)
        self.source = source

    # -- basic access --------------------------------------------------------

    def value(self, i: int, j: int) -> float:
        return float(self.values[i % self.n, j % self.n])

    @cached_property
    def vmin(self) -> float:
        return float(self.values.min())

    @cached_property
    def vmax(self) -> float:
        return float(self.values.max())

    @property
    def vrange(self) -> float:
        return max(self.vmax - self.vmin, 1e-300)

    # -- difference stencils (periodic wrap) ----------------------------------

    @cached_property
    def grad_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        v, n = self.values, self.n
        gx = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) * (n / 2.0)
        gy = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) * (n / 2.0)
        return gx, gy

    @cached_property
    def hess_nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        v, n = self.values, self.n
        hxx = (np.roll(v, -1, axis=0) - 2 * v + np.roll(v, 1, axis=0)) * (n * n)
        hyy = (np.roll(v, -1, axis=1) - 2 * v + np.roll(v, 1, axis=1)) * (n * n)
        hxy = (
            np.roll(v, (-1, -1), axis=(0, 1))
            - np.roll(v, (-1, 1), axis=(0, 1))
            - np.roll(v, (1, -1), axis=(0, 1))
            + np.roll(v, (1, 1), axis=(0, 1))
        ) * (n * n / 4.0)
        return hxx, hyy, hxy

    # -- interpolation ---------------------------------------------------------

    def _corners(self, arr: np.ndarray, x, y):
        n = self.n
        fx = np.asarray(x, dtype=float) * n
        fy = np.asarray(y, dtype=float) * n
        i = np.floor(fx).astype(np.int64)
        j = np.floor(fy).astype(np.int64)
        u = fx - i
        v = fy - j
        i %= n
        j %= n
        i1 = (i + 1) % n
        j1 = (j + 1) % n
        return arr[i, j], arr[i1, j], arr[i, j1], arr[i1, j1], u, v

    def interp(self, arr: np.ndarray, x, y):
        """Bilinear interpolation of a node array at torus points (x, y)."""
        a00, a10, a01, a11, u, v = self._corners(arr, x, y)
        return (
            a00 * (1 - u) * (1 - v)
            + a10 * u * (1 - v)
            + a01 * (1 - u) * v
            + a11 * u * v
        )

    def value_at(self, x, y):
        return self.interp(self.values, x, y)

    def exact_at(self, x, y):
        """Field value via the source expression when present, else bilinear."""
        if self.source is not None:
            return self.source.evaluate(x, y)
        return self.value_at(x, y)

    def grad_at(self, x, y):
        gx, gy = self.grad_nodes
        return self.interp(gx, x, y), self.interp(gy, x, y)

    def hess_at(self, x, y):
        hxx, hyy, hxy = self.hess_nodes
        return self.interp(hxx, x, y), self.interp(hyy, x, y), self.interp(hxy, x, y)

    def grad_jacobian_at(self, x, y):
        """Exact Jacobian of the bilinear interpolant of the gradient field.

        Used by the Newton refinement: d(interp gx)/dx etc. are piecewise
        linear and computable from the cell corners, no extra stencil needed.
        """
        gx, gy = self.grad_nodes
        n = self.n
        out = np.empty((2, 2))
        for row, arr in enumerate((gx, gy)):
            a00, a10, a01, a11, u, v = self._corners(arr, x, y)
            out[row, 0] = ((a10 - a00) * (1 - v) + (a11 - a01) * v) * n
            out[row, 1] = ((a01 - a00) * (1 - u) + (a11 - a10) * u) * n
        return out


def sample_grid(expr, n: int) -> GridField:
    """Sample an analytic field on the N x N periodic grid.

    ``expr`` is anything with an ``evaluate(x, y)`` method (a FieldExpr or a
    constructed fixture).  1-periodicity in both variables is verified on a
    64-point probe set with tolerance 1e-9; NotPeriodic is raised otherwise.
    """
    if not isinstance(n, (int, np.integer)) or n < 64 or (n & (n - 1)) != 0:
        raise InvalidResolution(f"resolution must be a power of two >= 64, got {n}")
    _check_periodicity(expr)
    coords = np.arange(n, dtype=float) / n
    xs, ys = np.meshgrid(coords, coords, indexing="ij")
    values = np.asarray(expr.evaluate(xs, ys), dtype=float)
    if values.shape != (n, n):
        values = np.broadcast_to(values, (n, n)).copy()
    return GridField(values, source=expr)


def eval_bilinear(field: GridField, p: TorusPoint) -> float:
    """Bilinear interpolation with periodic wrap; exact at grid nodes."""
    return float(field.value_at(p.x, p.y))


# ---------------------------------------------------------------------------
# Field file format
# ---------------------------------------------------------------------------
#
#   line 1: "expr: <expression>"      (analytic field; resolution supplied by caller)
#   or      "grid: <N>" followed by N rows of N space-separated reals,
#           row-major with row = y index (row j column i holds f(i/N, j/N)).


def read_field_text(text: str):
    """Parse a field file; returns a FieldExpr or a GridField."""
    lines = text.splitlines()
    if not lines:
        raise FieldSyntaxError("empty field file", 0)
    head = lines[0].strip()
    if head.startswith("expr:"):
        return parse_field_expr(head[len("expr:"):].strip())
    if head.startswith("grid:"):
        try:
            n = int(head[len("grid:"):].strip())
        except ValueError:
            raise FieldSyntaxError("malformed grid header", 0) from None
        rows = [ln for ln in lines[1:] if ln.strip()]
        if len(rows) != n:
            raise FieldSyntaxError(f"expected {n} grid rows, found {len(rows)}", 0)
        data = np.array([[float(tok) for tok in ln.split()] for ln in rows])
        if data.shape != (n, n):
            raise FieldSyntaxError(f"expected {n}x{n} grid values", 0)
        return GridField(data.T.copy())  # file rows are y-indexed
    raise FieldSyntaxError("field file must start with 'expr:' or 'grid:'", 0)


def write_field_text(field: GridField, prefer_expr: bool = True) -> str:
    if prefer_expr and isinstance(field.source, FieldExpr):
        return f"expr: {field.source.pretty()}\n"
    n = field.n
    lines = [f"grid: {n}"]
    for j in range(n):
        lines.append(" ".join(repr(float(v)) for v in field.values[:, j]))
    return "\n".join(lines) + "\n"
