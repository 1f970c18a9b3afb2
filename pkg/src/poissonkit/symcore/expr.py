"""Immutable expression trees.

Nodes are plain classes with ``__slots__`` and a cached hash, so they can be
used as dictionary keys and shared freely.  Arithmetic operators build raw
(unnormalized) trees; call :func:`poissonkit.symcore.normalize` to bring a tree
into canonical rational-function form.
"""

from fractions import Fraction
from numbers import Integral, Rational as _RationalABC

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class Expr:
    __slots__ = ("_hash", "_free")

    # structural identity -------------------------------------------------
    def _key(self):
        raise NotImplementedError

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return type(self) is type(other) and hash(self) == hash(other) and self._key() == other._key()

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def children(self):
        return ()

    @property
    def free_symbols(self):
        fs = self._free
        if fs is None:
            fs = frozenset()
            for c in self.children():
                fs |= c.free_symbols
            object.__setattr__(self, "_free", fs)
        return fs

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Add((self, other))

    def __radd__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Add((other, self))

    def __sub__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Add((self, Mul((MINUS_ONE, other))))

    def __rsub__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Add((other, Mul((MINUS_ONE, self))))

    def __mul__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Mul((self, other))

    def __rmul__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Mul((other, self))

    def __truediv__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Div(self, other)

    def __rtruediv__(self, other):
        other = as_expr(other, strict=False)
        return NotImplemented if other is None else Div(other, self)

    def __neg__(self):
        return Mul((MINUS_ONE, self))

    def __pos__(self):
        return self

    def __pow__(self, k):
        if not isinstance(k, Integral):
            raise TypeError("only integer exponents are supported")
        return Pow(self, int(k))

    def __str__(self):
        from .printer import to_text
        return to_text(self)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


def _init(obj, **fields):
    object.__setattr__(obj, "_hash", None)
    object.__setattr__(obj, "_free", None)
    for k, v in fields.items():
        object.__setattr__(obj, k, v)


class Rational(Expr):
    """Exact rational constant in lowest terms."""

    __slots__ = ("value",)

    def __init__(self, value):
        _init(self, value=Fraction(value))
        object.__setattr__(self, "_free", frozenset())

    def _key(self):
        return (self.value.numerator, self.value.denominator)


class Float(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        _init(self, value=float(value))
        object.__setattr__(self, "_free", frozenset())

    def _key(self):
        return self.value


class Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        _init(self, name=str(name))
        object.__setattr__(self, "_free", frozenset((self.name,)))

    def _key(self):
        return self.name


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        args = tuple(args)
        if len(args) < 2:
            raise ValueError("Add needs at least two terms")
        _init(self, args=args)

    def _key(self):
        return self.args

    def children(self):
        return self.args


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        args = tuple(args)
        if len(args) < 2:
            raise ValueError("Mul needs at least two factors")
        _init(self, args=args)

    def _key(self):
        return self.args

    def children(self):
        return self.args


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp):
        if not isinstance(exp, Integral):
            raise TypeError("symbolic or fractional exponents are not supported")
        _init(self, base=as_expr(base), exp=int(exp))

    def _key(self):
        return (self.base, self.exp)

    def children(self):
        return (self.base,)


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        _init(self, num=as_expr(num), den=as_expr(den))

    def _key(self):
        return (self.num, self.den)

    def children(self):
        return (self.num, self.den)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        _init(self, name=name, arg=as_expr(arg))

    def _key(self):
        return (self.name, self.arg)

    def children(self):
        return (self.arg,)


ZERO = Rational(0)
ONE = Rational(1)
MINUS_ONE = Rational(-1)


def as_expr(x, strict=True):
    """Coerce numbers to constant nodes; pass expressions through."""
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        return Rational(int(x))
    if isinstance(x, (Integral, _RationalABC)):
        return Rational(Fraction(x))
    if isinstance(x, float):
        return Float(x)
    if strict:
        raise TypeError(f"cannot convert {type(x).__name__} to an expression")
    return None


def sym(name):
    return Symbol(name)


def symbols(names):
    """``symbols("q p")`` -> (Symbol('q'), Symbol('p'))."""
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(Symbol(n) for n in names)


def func(name, arg):
    return Func(name, as_expr(arg))


def sin(x):
    return Func("sin", as_expr(x))


def cos(x):
    return Func("cos", as_expr(x))


def exp(x):
    return Func("exp", as_expr(x))


def log(x):
    return Func("log", as_expr(x))


def sqrt(x):
    return Func("sqrt", as_expr(x))


def walk(e):
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))
