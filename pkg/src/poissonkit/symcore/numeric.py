"""Floating-point evaluation: a checked tree walker and a compiled fast path."""

import math
from functools import lru_cache

from ..errors import DomainError, UnboundSymbolError
from .expr import Add, Div, Float, Func, Mul, Pow, Rational, Symbol, as_expr
from .printer import to_text

_MATH = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log, "sqrt": math.sqrt}


def evaluate(e, point):
    """Evaluate ``e`` at ``point`` (mapping name -> float).

    Raises :class:`UnboundSymbolError` for missing symbols and
    :class:`DomainError` naming the offending sub-expression.
    """
    return _eval(as_expr(e), point, {})


def _eval(e, point, memo):
    r = memo.get(e)
    if r is not None:
        return r
    if isinstance(e, Rational):
        r = e.value.numerator / e.value.denominator
    elif isinstance(e, Float):
        r = e.value
    elif isinstance(e, Symbol):
        try:
            r = float(point[e.name])
        except KeyError:
            raise UnboundSymbolError(e.name) from None
    elif isinstance(e, Add):
        r = math.fsum(_eval(a, point, memo) for a in e.args)
    elif isinstance(e, Mul):
        r = 1.0
        for a in e.args:
            r *= _eval(a, point, memo)
    elif isinstance(e, Pow):
        b = _eval(e.base, point, memo)
        if b == 0.0 and e.exp < 0:
            raise DomainError(f"division by zero in {to_text(e)}", e)
        try:
            r = b ** e.exp
        except OverflowError:
            raise DomainError(f"overflow in {to_text(e)}", e) from None
    elif isinstance(e, Div):
        d = _eval(e.den, point, memo)
        if d == 0.0:
            raise DomainError(f"division by zero: denominator {to_text(e.den)} vanishes", e.den)
        r = _eval(e.num, point, memo) / d
    elif isinstance(e, Func):
        u = _eval(e.arg, point, memo)
        if e.name == "log" and u <= 0.0:
            raise DomainError(f"log of non-positive value {u!r} in {to_text(e)}", e)
        if e.name == "sqrt" and u < 0.0:
            raise DomainError(f"sqrt of negative value {u!r} in {to_text(e)}", e)
        try:
            r = _MATH[e.name](u)
        except OverflowError:
            raise DomainError(f"overflow in {to_text(e)}", e) from None
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = r
    return r


def _code(e, names, memo):
    r = memo.get(e)
    if r is not None:
        return r
    if isinstance(e, Rational):
        r = repr(e.value.numerator / e.value.denominator)
    elif isinstance(e, Float):
        r = repr(e.value)
    elif isinstance(e, Symbol):
        r = names[e.name]
    elif isinstance(e, Add):
        r = "(" + " + ".join(_code(a, names, memo) for a in e.args) + ")"
    elif isinstance(e, Mul):
        r = "(" + " * ".join(_code(a, names, memo) for a in e.args) + ")"
    elif isinstance(e, Pow):
        b = _code(e.base, names, memo)
        r = f"({b} ** {e.exp})" if e.exp != 2 else f"({b} * {b})"
    elif isinstance(e, Div):
        r = f"({_code(e.num, names, memo)} / {_code(e.den, names, memo)})"
    elif isinstance(e, Func):
        r = f"_{e.name}({_code(e.arg, names, memo)})"
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = r
    return r


class CompiledFunction:
    """Vector of expressions compiled to a Python function of positional floats.

    ``f(*values)`` returns a tuple of floats.  Domain failures are re-run
    through :func:`evaluate` so the error names the offending sub-expression.
    """

    def __init__(self, exprs, names):
        self.exprs = tuple(as_expr(e) for e in exprs)
        self.names = tuple(names)
        missing = set().union(*(e.free_symbols for e in self.exprs)) - set(self.names) if self.exprs else set()
        if missing:
            raise UnboundSymbolError(sorted(missing)[0])
        argn = {n: f"v{i}" for i, n in enumerate(self.names)}
        memo = {}
        body = ", ".join(_code(e, argn, memo) for e in self.exprs)
        src = f"def _f({', '.join(argn[n] for n in self.names)}):\n    return ({body}{',' if len(self.exprs) == 1 else ''})\n"
        ns = {f"_{k}": v for k, v in _MATH.items()}
        exec(compile(src, "<poissonkit>", "exec"), ns)
        self._f = ns["_f"]

    def __call__(self, *values):
        try:
            return self._f(*values)
        except (ValueError, ZeroDivisionError, OverflowError):
            point = dict(zip(self.names, values))
            for e in self.exprs:
                evaluate(e, point)
            raise DomainError("numeric evaluation failed") from None

    def at(self, point):
        return self(*(float(point[n]) for n in self.names))


@lru_cache(maxsize=4096)
def compile_exprs(exprs, names):
    """Cached :class:`CompiledFunction` for a tuple of expressions."""
    return CompiledFunction(tuple(exprs), tuple(names))


def guards(e):
    """Sub-expressions whose values restrict the domain of ``e``.

    Returns a list of ``(kind, expr)`` with kind in {"den", "log", "sqrt"}.
    """
    out = []
    seen = set()
    stack = [as_expr(e)]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if isinstance(n, Div):
            out.append(("den", n.den))
        elif isinstance(n, Pow) and n.exp < 0:
            out.append(("den", n.base))
        elif isinstance(n, Func) and n.name in ("log", "sqrt"):
            out.append((n.name, n.arg))
        stack.extend(n.children())
    return out
