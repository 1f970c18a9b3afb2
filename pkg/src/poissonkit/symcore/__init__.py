"""Embedded expression engine: parse, differentiate, normalize, evaluate, zero-test."""

from .expr import (Expr, Rational, Float, Symbol, Add, Mul, Pow, Div, Func, ZERO, ONE,
                   as_expr, sym, symbols, sin, cos, exp, log, sqrt, walk)
from .printer import to_text
from .parser import parse, parse_raw
from .normal import (RatContext, normalize, normalize_with_assumptions, is_rational_function,
                     is_constant, constant_value, numer_denom)
from .calculus import differentiate, gradient, substitute
from .numeric import evaluate, compile_exprs, CompiledFunction, guards
from .zero import (ZeroVerdict, is_zero, is_zero_all, combine, box_points,
                   PROVED_ZERO, NUMERIC_ZERO, NON_ZERO)
from . import linalg

__all__ = [
    "Expr", "Rational", "Float", "Symbol", "Add", "Mul", "Pow", "Div", "Func", "ZERO", "ONE",
    "as_expr", "sym", "symbols", "sin", "cos", "exp", "log", "sqrt", "walk", "to_text",
    "parse", "parse_raw", "RatContext", "normalize", "normalize_with_assumptions",
    "is_rational_function", "is_constant", "constant_value", "numer_denom",
    "differentiate", "gradient", "substitute", "evaluate", "compile_exprs",
    "CompiledFunction", "guards", "ZeroVerdict", "is_zero", "is_zero_all", "combine",
    "box_points", "PROVED_ZERO", "NUMERIC_ZERO", "NON_ZERO", "linalg",
]
