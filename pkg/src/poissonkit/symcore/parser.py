"""Recursive-descent parser for scalar expressions.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | factor
    factor := base ('^' exponent)?
    exponent := integer | '-' integer | '(' ['-'] integer ')'
    base   := number | identifier | func '(' expr ')' | '(' expr ')'

Numbers are integers or decimals (optionally with an exponent part); a
fraction such as ``1/2`` is read as a quotient of integers.
"""

import re
from fractions import Fraction

from ..errors import ParseError, UnknownIdentifierError
from .expr import FUNCTIONS, Add, Div, Float, Func, Mul, Pow, Rational, Symbol, MINUS_ONE

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)"
    r"|(?P<id>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
    r")"
)


def _tokenize(text):
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        val = m.group(kind)
        if val == "**":
            val = "^"
        out.append((kind, val, start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text, names):
        self.text = text
        self.names = names
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        kind, v, pos = self.take()
        if v != val or kind == "end" and val:
            what = "end of input" if kind == "end" else repr(v)
            raise ParseError(f"expected {val!r}, found {what}", pos, self.text)

    def error(self, msg, pos=None):
        if pos is None:
            pos = self.peek()[2]
        raise ParseError(msg, pos, self.text)

    def parse(self):
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {v!r}", pos)
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else Mul((MINUS_ONE, t)))
        return terms[0] if len(terms) == 1 else Add(terms)

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = Mul((e, rhs)) if op == "*" else Div(e, rhs)
        return e

    def unary(self):
        kind, v, _ = self.peek()
        if kind == "op" and v in ("+", "-"):
            self.take()
            e = self.unary()
            return e if v == "+" else Mul((MINUS_ONE, e))
        return self.factor()

    def factor(self):
        base = self.base()
        kind, v, _ = self.peek()
        if kind == "op" and v == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self):
        kind, v, pos = self.peek()
        paren = False
        if kind == "op" and v == "(":
            self.take()
            paren = True
            kind, v, pos = self.peek()
        sign = 1
        if kind == "op" and v in ("-", "+"):
            self.take()
            sign = -1 if v == "-" else 1
            kind, v, pos = self.peek()
        if kind == "id":
            self.error("symbolic exponents are not supported", pos)
        if kind != "num" or not v.isdigit():
            self.error("exponent must be an integer", pos)
        self.take()
        if paren:
            self.expect(")")
        return sign * int(v)

    def base(self):
        kind, v, pos = self.take()
        if kind == "num":
            if v.isdigit():
                return Rational(int(v))
            return Float(float(v))
        if kind == "id":
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(v, arg)
            if self.names is not None and v not in self.names:
                raise UnknownIdentifierError(v, pos, self.text)
            return Symbol(v)
        if kind == "op" and v == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(v)
        raise ParseError(f"unexpected {what}", pos, self.text)


def parse_raw(text, names=None):
    """Parse without normalizing.  ``names=None`` accepts any identifier."""
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    if not text.strip():
        raise ParseError("empty expression", 0, text)
    return _Parser(text, None if names is None else set(names)).parse()


def parse(text, chart=None, params=()):
    """Parse ``text`` over the given coordinate and parameter names.

    Returns the normalized expression.  With ``chart=None`` every identifier
    is accepted.
    """
    from .normal import normalize

    names = None if chart is None else list(chart) + list(params)
    return normalize(parse_raw(text, names))


def as_fraction(text):
    """Read a plain numeric literal such as ``"3/4"`` or ``"0.25"`` exactly."""
    return Fraction(str(text).strip())
