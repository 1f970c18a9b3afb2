"""Canonical rational-function form.

An expression is mapped into the field of rational functions over QQ whose
generators are its symbols plus its transcendental sub-terms (``sin(...)``,
``sqrt(...)``, ...) treated as opaque atoms.  Polynomial gcd cancellation is
delegated to sympy's sparse ``FracField``; everything else (generator choice,
sqrt reduction, monomial order, content removal, rebuilding the tree) lives
here.

Canonical output:

* numerator and denominator expanded, terms sorted by total degree
  (descending) and then lexicographically over the generator order;
* generator order: symbols by name, then atoms by printed form;
* denominator has integer coefficients, unit content and positive leading
  coefficient; a denominator of 1 is dropped;
* ``sqrt(u)^k`` is rewritten as ``u^(k//2) * sqrt(u)^(k%2)``.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from sympy import QQ
from sympy.polys.fields import FracField
from sympy.polys.orderings import lex

from ..errors import InputError
from .expr import Add, Div, Float, Func, Mul, Pow, Rational, Symbol, Expr, ZERO, ONE, as_expr
from .printer import to_text


@lru_cache(maxsize=None)
def _field(k):
    names = tuple(f"g{i}" for i in range(max(k, 1)))
    return FracField(names, QQ, lex)


def _frac(c):
    return Fraction(int(c.numerator), int(c.denominator))


def _gen_key(g):
    if isinstance(g, Symbol):
        return (0, g.name)
    return (1, g.name, to_text(g.arg))


def _perfect_square(n):
    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None


def _fold(name, arg):
    """Exact value of ``name(arg)`` for rational ``arg`` when there is one."""
    v = arg.value
    if name == "sin" and v == 0:
        return ZERO
    if name in ("cos", "exp") and v == 0:
        return ONE
    if name == "log" and v == 1:
        return ZERO
    if name == "sqrt" and v >= 0:
        a = _perfect_square(v.numerator)
        b = _perfect_square(v.denominator)
        if a is not None and b is not None:
            return Rational(Fraction(a, b))
    return None


@lru_cache(maxsize=1 << 15)
def _atom(node):
    """Normalized form of a function node: a folded constant or a Func atom."""
    arg = normalize(node.arg)
    if isinstance(arg, Rational):
        folded = _fold(node.name, arg)
        if folded is not None:
            return folded
    return Func(node.name, arg)


def _collect(e, gens):
    if isinstance(e, Symbol):
        gens.add(e)
    elif isinstance(e, Func):
        a = _atom(e)
        if isinstance(a, Func):
            if a not in gens:
                gens.add(a)
                if a.name == "sqrt":
                    _collect(a.arg, gens)
    else:
        for c in e.children():
            _collect(c, gens)


class RatContext:
    """A rational function field large enough to hold a set of expressions."""

    def __init__(self, exprs):
        gens = set()
        for e in exprs:
            _collect(as_expr(e), gens)
        self.gens = sorted(gens, key=_gen_key)
        self.index = {g: i for i, g in enumerate(self.gens)}
        self.K = _field(len(self.gens))
        self.Kgens = self.K.gens
        self.assumptions = []
        self._memo = {}
        self._sqrt_args = {}

    # Expr -> field element ---------------------------------------------------
    def const(self, value):
        v = Fraction(value)
        return self.K(QQ(v.numerator, v.denominator))

    def to_el(self, e):
        e = as_expr(e)
        memo = self._memo
        r = memo.get(e)
        if r is None:
            r = self._conv(e)
            memo[e] = r
        return r

    def _conv(self, e):
        K = self.K
        if isinstance(e, Rational):
            return self.const(e.value)
        if isinstance(e, Float):
            return self.const(Fraction(repr(e.value)))
        if isinstance(e, Symbol):
            return self.Kgens[self.index[e]]
        if isinstance(e, Func):
            a = _atom(e)
            if isinstance(a, Rational):
                return self.const(a.value)
            return self.Kgens[self.index[a]]
        if isinstance(e, Add):
            acc = K.zero
            for a in e.args:
                acc = acc + self.to_el(a)
            return acc
        if isinstance(e, Mul):
            acc = K.one
            for a in e.args:
                acc = acc * self.to_el(a)
                if not acc:
                    return K.zero
            return acc
        if isinstance(e, Pow):
            b = self.to_el(e.base)
            if e.exp == 0:
                return self.K.one  # 0^0 = 1, as in numeric evaluation
            if e.exp < 0:
                if not b:
                    raise InputError(f"division by zero in {to_text(e)}")
                self._assume(b)
            return b ** e.exp
        if isinstance(e, Div):
            d = self.to_el(e.den)
            if not d:
                raise InputError(f"division by zero in {to_text(e)}")
            self._assume(d)
            return self.to_el(e.num) / d
        raise TypeError(f"unknown node {type(e).__name__}")

    def _assume(self, d):
        if d.numer.is_ground and d.denom.is_ground:
            return
        self.assumptions.append(d)

    # field element -> Expr ---------------------------------------------------
    def _reduce_sqrt(self, el):
        for idx, g in enumerate(self.gens):
            if not (isinstance(g, Func) and g.name == "sqrt"):
                continue
            num, den = el.numer, el.denom
            if max((m[idx] for m in num.keys()), default=0) < 2 and \
                    max((m[idx] for m in den.keys()), default=0) < 2:
                continue
            u = self._sqrt_args.get(idx)
            if u is None:
                u = self.to_el(g.arg)
                self._sqrt_args[idx] = u
            el = self._rebuild(num, idx, u) / self._rebuild(den, idx, u)
        return el

    def _rebuild(self, poly, idx, u):
        K = self.K
        g = self.Kgens[idx]
        acc = K.zero
        for mon, c in poly.terms():
            t = self.const(_frac(c))
            for j, k in enumerate(mon):
                if not k:
                    continue
                if j == idx:
                    t = t * (u ** (k // 2)) * (g ** (k % 2))
                else:
                    t = t * self.Kgens[j] ** k
            acc = acc + t
        return acc

    def to_expr(self, el):
        for _ in range(8):
            new = self._reduce_sqrt(el)
            if new == el:
                break
            el = new
        num = {m: _frac(c) for m, c in el.numer.terms()}
        den = {m: _frac(c) for m, c in el.denom.terms()}
        if not num:
            return ZERO
        dterms = sorted(den.items(), key=_mon_key)
        lcm = 1
        for _, c in dterms:
            lcm = lcm * c.denominator // gcd(lcm, c.denominator)
        g = 0
        for _, c in dterms:
            g = gcd(g, (c * lcm).numerator)
        scale = Fraction(lcm, g)
        if dterms[0][1] < 0:
            scale = -scale
        num = {m: c * scale for m, c in num.items()}
        den = {m: c * scale for m, c in den.items()}
        n_expr = self._poly_expr(num)
        if len(den) == 1 and den.get((0,) * len(self.Kgens)) == 1:
            return n_expr
        return Div(n_expr, self._poly_expr(den))

    def _poly_expr(self, poly):
        terms = []
        for mon, c in sorted(poly.items(), key=_mon_key):
            factors = []
            for j, k in enumerate(mon):
                if k == 1:
                    factors.append(self.gens[j])
                elif k:
                    factors.append(Pow(self.gens[j], k))
            if not factors:
                terms.append(Rational(c))
            elif c == 1:
                terms.append(factors[0] if len(factors) == 1 else Mul(factors))
            else:
                terms.append(Mul([Rational(c)] + factors))
        if not terms:
            return ZERO
        return terms[0] if len(terms) == 1 else Add(terms)

    def poly_terms(self, el):
        """Numerator monomials of a polynomial element, or None if not polynomial."""
        if not el.denom.is_ground:
            return None
        d = _frac(el.denom.LC)
        return {m: _frac(c) / d for m, c in el.numer.terms()}


def _mon_key(item):
    mon = item[0]
    return (-sum(mon), tuple(-k for k in mon))


@lru_cache(maxsize=1 << 16)
def _normalize_cached(e):
    ctx = RatContext((e,))
    return ctx.to_expr(ctx.to_el(e)), tuple(ctx.to_expr(d) for d in ctx.assumptions)


def normalize(e):
    """Canonical form of ``e`` (see module docstring)."""
    e = as_expr(e)
    return _normalize_cached(e)[0]


def normalize_with_assumptions(e):
    """Return ``(normal_form, nonzero_assumptions)``.

    The assumptions are the non-constant denominators met while normalizing;
    the normal form is valid where none of them vanishes.
    """
    e = as_expr(e)
    nf, assumed = _normalize_cached(e)
    seen = []
    for a in assumed:
        if a not in seen:
            seen.append(a)
    return nf, seen


def is_rational_function(e):
    """True when ``e`` contains no transcendental atoms and no floats."""
    return not any(isinstance(n, Func) for n in _nodes(normalize(e)))


def _nodes(e):
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children())


def numer_denom(e):
    """Split a normalized expression into (numerator, denominator)."""
    e = normalize(e)
    if isinstance(e, Div):
        return e.num, e.den
    return e, ONE


def is_constant(e):
    return isinstance(normalize(e), Rational)


def constant_value(e):
    e = normalize(e)
    if not isinstance(e, Rational):
        raise ValueError(f"{to_text(e)} is not a constant")
    return e.value


__all__ = [
    "RatContext", "normalize", "normalize_with_assumptions", "is_rational_function",
    "numer_denom", "is_constant", "constant_value", "Expr",
]
