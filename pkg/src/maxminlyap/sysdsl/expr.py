"""Expression ASTs with exact symbolic differentiation.

Gradients of region functions and non-quadratic base functions are
needed at machine precision; finite differences would pollute the
set-valued derivative verdicts, so derivatives are taken symbolically.
The node set is deliberately small: real literals, state variables
x1..xn, arithmetic, integer powers, sin/cos/atan/sqrt, and quadform(P)
as sugar for x^T P x.
"""

import math
from dataclasses import dataclass

from ..errors import DomainEvalError, InvalidInputError


class Expr:
    """Base class for AST nodes; nodes are immutable and compare structurally."""

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based state coordinate


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Neg(Expr):
    a: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    fn: str  # sin | cos | atan | sqrt
    arg: Expr


@dataclass(frozen=True)
class QuadForm(Expr):
    matrix: tuple  # tuple of row tuples, symmetric

    @property
    def dim(self):
        return len(self.matrix)


FUNCTIONS = {"sin": math.sin, "cos": math.cos, "atan": math.atan, "sqrt": math.sqrt}


# ---------------------------------------------------------------------------
# smart constructors with light constant folding (keeps derivative ASTs small)

ZERO = Num(0.0)
ONE = Num(1.0)


def _is_num(e, v=None):
    return isinstance(e, Num) and (v is None or e.value == v)


def add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Sub(a, b)


def mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def div(a, b):
    if _is_num(a, 0.0):
        return ZERO
    if _is_num(b, 1.0):
        return a
    return Div(a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def powi(base, n):
    if n == 0:
        return ONE
    if n == 1:
        return base
    return Pow(base, n)


# ---------------------------------------------------------------------------
# evaluation


def eval_expr(e, x):
    """Numeric value of ``e`` at state vector ``x`` (sequence, 0-indexed)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.index > len(x):
            raise InvalidInputError(
                f"state has dimension {len(x)}, expression uses x{e.index}"
            )
        return float(x[e.index - 1])
    if isinstance(e, Add):
        return eval_expr(e.a, x) + eval_expr(e.b, x)
    if isinstance(e, Sub):
        return eval_expr(e.a, x) - eval_expr(e.b, x)
    if isinstance(e, Mul):
        return eval_expr(e.a, x) * eval_expr(e.b, x)
    if isinstance(e, Div):
        d = eval_expr(e.b, x)
        if d == 0.0:
            raise DomainEvalError("division by zero", to_str(e))
        return eval_expr(e.a, x) / d
    if isinstance(e, Neg):
        return -eval_expr(e.a, x)
    if isinstance(e, Pow):
        base = eval_expr(e.base, x)
        if base == 0.0 and e.exponent < 0:
            raise DomainEvalError("zero raised to a negative power", to_str(e))
        return base**e.exponent
    if isinstance(e, Call):
        v = eval_expr(e.arg, x)
        if e.fn == "sqrt" and v < 0.0:
            raise DomainEvalError("sqrt of a negative value", to_str(e))
        return FUNCTIONS[e.fn](v)
    if isinstance(e, QuadForm):
        n = e.dim
        if len(x) < n:
            raise InvalidInputError(
                f"state has dimension {len(x)}, quadform needs {n}"
            )
        acc = 0.0
        for i in range(n):
            row = e.matrix[i]
            for j in range(n):
                acc += float(x[i]) * row[j] * float(x[j])
        return acc
    raise TypeError(f"unknown expression node {type(e).__name__}")


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e, var):
    """Exact partial derivative of ``e`` with respect to x<var> (1-based)."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == var else ZERO
    if isinstance(e, Add):
        return add(differentiate(e.a, var), differentiate(e.b, var))
    if isinstance(e, Sub):
        return sub(differentiate(e.a, var), differentiate(e.b, var))
    if isinstance(e, Mul):
        return add(
            mul(differentiate(e.a, var), e.b), mul(e.a, differentiate(e.b, var))
        )
    if isinstance(e, Div):
        num = sub(
            mul(differentiate(e.a, var), e.b), mul(e.a, differentiate(e.b, var))
        )
        return div(num, powi(e.b, 2))
    if isinstance(e, Neg):
        return neg(differentiate(e.a, var))
    if isinstance(e, Pow):
        inner = differentiate(e.base, var)
        return mul(mul(Num(float(e.exponent)), powi(e.base, e.exponent - 1)), inner)
    if isinstance(e, Call):
        inner = differentiate(e.arg, var)
        if e.fn == "sin":
            return mul(Call("cos", e.arg), inner)
        if e.fn == "cos":
            return neg(mul(Call("sin", e.arg), inner))
        if e.fn == "atan":
            return div(inner, add(ONE, powi(e.arg, 2)))
        if e.fn == "sqrt":
            return div(inner, mul(Num(2.0), Call("sqrt", e.arg)))
    if isinstance(e, QuadForm):
        # gradient of x^T P x is 2 P x
        if var > e.dim:
            return ZERO
        row = e.matrix[var - 1]
        acc = ZERO
        for j in range(e.dim):
            acc = add(acc, mul(Num(2.0 * row[j]), Var(j + 1)))
        return acc
    raise TypeError(f"unknown expression node {type(e).__name__}")


def max_var(e):
    """Largest state index referenced by ``e`` (0 for constants)."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, QuadForm):
        return e.dim
    if isinstance(e, (Add, Sub, Mul, Div)):
        return max(max_var(e.a), max_var(e.b))
    if isinstance(e, Neg):
        return max_var(e.a)
    if isinstance(e, Pow):
        return max_var(e.base)
    if isinstance(e, Call):
        return max_var(e.arg)
    return 0


# ---------------------------------------------------------------------------
# printing (deterministic; parse(to_str(e)) reproduces e structurally)

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_ATOM = 4


def _prec(e):
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num) and e.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(e, limit):
    s = to_str(e)
    return f"({s})" if _prec(e) < limit else s


def _fmt_num(v):
    return repr(float(v))


def to_str(e):
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Add):
        return f"{_wrap(e.a, _PREC_ADD)} + {_wrap(e.b, _PREC_ADD + 1)}"
    if isinstance(e, Sub):
        return f"{_wrap(e.a, _PREC_ADD)} - {_wrap(e.b, _PREC_ADD + 1)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.a, _PREC_MUL)}*{_wrap(e.b, _PREC_MUL + 1)}"
    if isinstance(e, Div):
        return f"{_wrap(e.a, _PREC_MUL)}/{_wrap(e.b, _PREC_MUL + 1)}"
    if isinstance(e, Neg):
        return f"-{_wrap(e.a, _PREC_NEG + 1)}"
    if isinstance(e, Pow):
        return f"pow({to_str(e.base)}, {e.exponent})"
    if isinstance(e, Call):
        return f"{e.fn}({to_str(e.arg)})"
    if isinstance(e, QuadForm):
        rows = ", ".join(
            "[" + ", ".join(_fmt_num(v) for v in row) + "]" for row in e.matrix
        )
        return f"quadform([{rows}])"
    raise TypeError(f"unknown expression node {type(e).__name__}")
