"""Text rendering compatible with the parser grammar."""

from .expr import Add, Div, Float, Func, Mul, Pow, Rational, Symbol

_ATOM, _POW, _MUL, _ADD = 4, 3, 2, 1


def _prec(e):
    if isinstance(e, Rational):
        v = e.value
        return _ATOM if v.denominator == 1 and v >= 0 else _ADD
    if isinstance(e, Float):
        return _ATOM if e.value >= 0 else _ADD
    if isinstance(e, (Symbol, Func)):
        return _ATOM
    if isinstance(e, Pow):
        return _POW
    if isinstance(e, Mul):
        return _ADD if _text(e).startswith("-") else _MUL
    if isinstance(e, Div):
        return _ADD if _text(e).startswith("-") else _MUL
    return _ADD


def _wrap(e, min_prec):
    s = _text(e)
    return f"({s})" if _prec(e) < min_prec else s


def _float_text(x):
    s = repr(x)
    if s in ("inf", "-inf", "nan"):
        raise ValueError("non-finite constant cannot be printed")
    return s


def _text(e):
    if isinstance(e, Rational):
        v = e.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(e, Float):
        return _float_text(e.value)
    if isinstance(e, Symbol):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_text(e.arg)})"
    if isinstance(e, Pow):
        k = e.exp
        ks = str(k) if k >= 0 else f"({k})"
        return f"{_wrap(e.base, _ATOM)}^{ks}"
    if isinstance(e, Mul):
        args = list(e.args)
        sign = ""
        if isinstance(args[0], Rational) and args[0].value < 0:
            sign = "-"
            c = -args[0].value
            args = args[1:] if c == 1 else [Rational(c)] + args[1:]
        parts = [_wrap(a, _MUL + 1 if isinstance(a, Div) else _MUL) for a in args]
        return sign + "*".join(parts)
    if isinstance(e, Add):
        out = []
        for i, a in enumerate(e.args):
            s = f"({_text(a)})" if isinstance(a, Add) else _text(a)
            if i == 0:
                out.append(s)
            elif s.startswith("-"):
                out.append(" - " + s[1:])
            else:
                out.append(" + " + s)
        return "".join(out)
    if isinstance(e, Div):
        num = _text(e.num) if not isinstance(e.num, Add) else f"({_text(e.num)})"
        return f"{num}/{_wrap(e.den, _POW)}"
    raise TypeError(f"unknown node {type(e).__name__}")


def to_text(e):
    return _text(e)
