"""Configuration language: expressions, symbolic differentiation, parsing.

The text format is line-oriented with bracketed sections ([system],
[basis], [structure], [signal]), matrix literals ``[[a,b],[c,d]]`` and
mode blocks ``mode i { A = ...; Q = ... }``.  Expressions admit the
analytic builtins sin, cos, atan, sqrt, pow and quadform, which keeps
every region function analytic by construction.
"""

from .expr import (
    Expr,
    Num,
    Var,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Call,
    QuadForm,
    differentiate,
    eval_expr,
    to_str,
    max_var,
)
from .config import (
    ModeConfig,
    SystemConfig,
    BasisConfig,
    ParsedConfig,
    parse_config,
    parse_expr_text,
)

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Neg",
    "Pow",
    "Call",
    "QuadForm",
    "differentiate",
    "eval_expr",
    "to_str",
    "max_var",
    "ModeConfig",
    "SystemConfig",
    "BasisConfig",
    "ParsedConfig",
    "parse_config",
    "parse_expr_text",
]
