"""A small, total expression language for scalar profiles on the grid.

Configuration files describe proportionality profiles, external
potentials and wavefunction seeds as strings in this language.  The
language is deliberately closed: five coordinate variables, one
constant, seven functions, arithmetic with standard precedence.  That
keeps configs auditable and evaluation side-effect free.

Grammar (EBNF, also published in docs/expression-grammar.md)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , unary ] ;          (* right-associative *)
    atom    = number | name | name , "(" , expr , ")" | "(" , expr , ")" ;
    name    = letter , { letter | digit | "_" } ;

Variables: ``x``, ``y``, ``z``, ``r`` (= sqrt(x^2+y^2+z^2)), ``rho2``
(= x^2+y^2).  Constant: ``pi``.  Functions: ``sin cos exp sqrt tanh abs
ln``.  Unary minus binds looser than ``^``, so ``-x^2`` is ``-(x^2)``
and ``2^3^2`` is ``2^(3^2) = 512``.

Evaluation is total: non-finite results (division by zero, ``ln`` of a
non-positive value, ...) are collected across the whole grid and
reported once as :class:`~vortkit.errors.EvalDomainError`; evaluation
never aborts mid-grid.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalDomainError, ParseError
from .fieldgrid import Grid, ScalarField

VARIABLES = ("x", "y", "z", "r", "rho2")
FUNCTIONS = ("sin", "cos", "exp", "sqrt", "tanh", "abs", "ln")

_FUNC_IMPL = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "abs": np.abs,
    "ln": np.log,
}


# ---------------------------------------------------------------------------
# syntax tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Bin, Call]


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise ParseError(i, "a number, name, or operator", src[i])
        if m.lastgroup != "ws":
            kind = m.lastgroup
            tokens.append(_Token(kind, m.group(), i))
        i = m.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


# ---------------------------------------------------------------------------
# recursive-descent parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def fail(self, expected: str):
        raise ParseError(self.cur.pos, expected, self.cur.text)

    def accept_op(self, *ops: str):
        if self.cur.kind == "op" and self.cur.text in ops:
            return self.advance()
        return None

    def expect_op(self, op: str, expected: str):
        if not self.accept_op(op):
            self.fail(expected)

    def expr(self) -> Expr:
        node = self.term()
        while True:
            tok = self.accept_op("+", "-")
            if tok is None:
                return node
            node = Bin(tok.text, node, self.term())

    def term(self) -> Expr:
        node = self.unary()
        while True:
            tok = self.accept_op("*", "/")
            if tok is None:
                return node
            node = Bin(tok.text, node, self.unary())

    def unary(self) -> Expr:
        if self.accept_op("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept_op("^"):
            # exponent re-enters unary: right-associative, signed allowed
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            name = tok.text
            if self.accept_op("("):
                if name not in FUNCTIONS:
                    raise ParseError(tok.pos, f"a function name (one of {', '.join(FUNCTIONS)})", name)
                arg = self.expr()
                self.expect_op(")", "')'")
                return Call(name, arg)
            if name == "pi":
                return Num(np.pi)
            if name in VARIABLES:
                return Var(name)
            raise ParseError(tok.pos, f"a variable (one of {', '.join(VARIABLES)}) or 'pi'", name)
        if self.accept_op("("):
            node = self.expr()
            self.expect_op(")", "')'")
            return node
        self.fail("an operand")


def parse(src: str) -> Expr:
    """Parse expression text, raising ParseError with the offset of any
    malformed or unknown token."""
    p = _Parser(_tokenize(src))
    node = p.expr()
    if p.cur.kind != "end":
        p.fail("end of input or an operator")
    return node


# ---------------------------------------------------------------------------
# pretty printer
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def pretty(e: Expr) -> str:
    """Render a tree back to text; reparsing yields a structurally
    identical tree."""

    def go(node: Expr, parent_prec: int, rhs_of: str | None = None) -> str:
        if isinstance(node, Num):
            return format(node.value, ".17g")
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Call):
            return f"{node.func}({go(node.arg, 0)})"
        if isinstance(node, Neg):
            inner = go(node.arg, _PREC["neg"])
            text = f"-{inner}"
            return f"({text})" if parent_prec > _PREC["neg"] else text
        prec = _PREC[node.op]
        # left operand of a left-assoc op may share its precedence; the
        # right operand needs strictly higher unless the op is '^'
        if node.op == "^":
            lhs = go(node.lhs, prec + 1)
            rhs = go(node.rhs, prec)
        else:
            lhs = go(node.lhs, prec)
            rhs = go(node.rhs, prec + 1)
        text = f"{lhs} {node.op} {rhs}"
        return f"({text})" if parent_prec > prec else text

    return go(e, 0)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _eval(e: Expr, env: dict) -> np.ndarray:
    if isinstance(e, Num):
        return np.asarray(e.value, dtype=np.float64)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Call):
        return _FUNC_IMPL[e.func](_eval(e.arg, env))
    lhs = _eval(e.lhs, env)
    rhs = _eval(e.rhs, env)
    if e.op == "+":
        return lhs + rhs
    if e.op == "-":
        return lhs - rhs
    if e.op == "*":
        return lhs * rhs
    if e.op == "/":
        return lhs / rhs
    if e.op == "^":
        return np.float_power(lhs, rhs)
    raise AssertionError(f"unknown operator {e.op!r}")


def _env_for(x, y, z) -> dict:
    return {
        "x": x,
        "y": y,
        "z": z,
        "r": np.sqrt(x * x + y * y + z * z),
        "rho2": x * x + y * y,
    }


def evaluate_at(e: Expr, x: float, y: float, z: float) -> float:
    """Evaluate at a single point (may return a non-finite value; the
    per-grid domain check lives in evaluate_on_grid)."""
    with np.errstate(all="ignore"):
        return float(_eval(e, _env_for(np.float64(x), np.float64(y), np.float64(z))))


def evaluate_on_grid(e: Expr, g: Grid) -> ScalarField:
    """Evaluate pointwise at every grid coordinate.

    Domain violations (division by zero, ln of a non-positive value,
    sqrt of a negative, overflow) never abort mid-grid; the non-finite
    points are counted at the end and reported in one EvalDomainError.
    """
    X, Y, Z = g.meshgrid()
    with np.errstate(all="ignore"):
        vals = np.broadcast_to(_eval(e, _env_for(X, Y, Z)), g.shape).astype(np.float64, copy=True)
    finite = np.isfinite(vals)
    if not finite.all():
        bad = int(np.count_nonzero(~finite))
        raise EvalDomainError(
            f"expression is non-finite at {bad} of {g.npoints} grid points (first at index "
            f"{tuple(int(t) for t in np.argwhere(~finite)[0])})",
            bad_points=bad,
        )
    return ScalarField(g, vals)
