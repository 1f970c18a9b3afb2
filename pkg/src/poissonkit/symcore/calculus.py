"""Differentiation and substitution."""

from functools import lru_cache

from .expr import Add, Div, Float, Func, Mul, Pow, Rational, Symbol, ZERO, ONE, as_expr
from .normal import normalize


def _name(s):
    return s.name if isinstance(s, Symbol) else str(s)


def _d(e, x, memo):
    r = memo.get(e)
    if r is not None:
        return r
    if x not in e.free_symbols:
        r = ZERO
    elif isinstance(e, Symbol):
        r = ONE
    elif isinstance(e, Add):
        r = Add([_d(a, x, memo) for a in e.args])
    elif isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            if x not in a.free_symbols:
                continue
            rest = e.args[:i] + (_d(a, x, memo),) + e.args[i + 1:]
            terms.append(Mul(rest))
        r = terms[0] if len(terms) == 1 else Add(terms)
    elif isinstance(e, Pow):
        k = e.exp
        r = Mul((Rational(k), Pow(e.base, k - 1), _d(e.base, x, memo)))
    elif isinstance(e, Div):
        n, d = e.num, e.den
        r = Div(Add((Mul((_d(n, x, memo), d)), Mul((Rational(-1), n, _d(d, x, memo))))), Pow(d, 2))
    elif isinstance(e, Func):
        u = e.arg
        du = _d(u, x, memo)
        if e.name == "sin":
            outer = Func("cos", u)
        elif e.name == "cos":
            outer = Mul((Rational(-1), Func("sin", u)))
        elif e.name == "exp":
            outer = e
        elif e.name == "log":
            outer = Div(ONE, u)
        else:  # sqrt
            outer = Div(ONE, Mul((Rational(2), e)))
        r = Mul((outer, du))
    elif isinstance(e, (Rational, Float)):
        r = ZERO
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = r
    return r


@lru_cache(maxsize=1 << 16)
def _diff_cached(e, x):
    return normalize(_d(e, x, {}))


def differentiate(e, s):
    """Exact partial derivative of ``e`` with respect to symbol ``s``, normalized."""
    return _diff_cached(as_expr(e), _name(s))


def gradient(e, coords):
    return [differentiate(e, c) for c in coords]


def _subs(e, mapping, memo):
    r = memo.get(e)
    if r is not None:
        return r
    if not (e.free_symbols & mapping.keys()):
        r = e
    elif isinstance(e, Symbol):
        r = mapping[e.name]
    elif isinstance(e, (Add, Mul)):
        r = type(e)([_subs(a, mapping, memo) for a in e.args])
    elif isinstance(e, Pow):
        r = Pow(_subs(e.base, mapping, memo), e.exp)
    elif isinstance(e, Div):
        r = Div(_subs(e.num, mapping, memo), _subs(e.den, mapping, memo))
    elif isinstance(e, Func):
        r = Func(e.name, _subs(e.arg, mapping, memo))
    else:
        r = e
    memo[e] = r
    return r


def substitute(e, mapping, normal=True):
    """Replace symbols by expressions (or numbers); result normalized by default."""
    m = {_name(k): as_expr(v) for k, v in mapping.items()}
    r = _subs(as_expr(e), m, {})
    return normalize(r) if normal else r
