from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from poissonkit.errors import (DomainError, ParseError, UnboundSymbolError, UndecidableError,
                               UnknownIdentifierError)
from poissonkit.symcore import (ONE, ZERO, Rational, Symbol, compile_exprs, constant_value, cos,
                                differentiate, evaluate, exp, is_constant, is_zero, is_zero_all,
                                log, normalize, parse, sin, sqrt, substitute, to_text)
from poissonkit.symcore import linalg

x, y, z = Symbol("x"), Symbol("y"), Symbol("z")
NAMES = ("x", "y", "z")


# random polynomial-ish expressions -----------------------------------------------

def _leaf():
    return st.one_of(st.sampled_from([x, y, z]),
                     st.integers(-3, 3).map(lambda k: Rational(Fraction(k))))


def _build(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: t[0] + t[1]),
        st.tuples(children, children).map(lambda t: t[0] * t[1]),
        st.tuples(children, children).map(lambda t: t[0] - t[1]),
        st.tuples(children, st.integers(0, 3)).map(lambda t: t[0] ** t[1]),
    )


polys = st.recursive(_leaf(), _build, max_leaves=8)
points = st.tuples(*[st.floats(-1.5, 1.5, allow_nan=False)] * 3)


def _at(e, p):
    return evaluate(e, dict(zip(NAMES, p)))


# parser and printer ---------------------------------------------------------------

@pytest.mark.parametrize("text,value", [
    ("1 + 2*3", 7), ("2^3", 8), ("-2^2", -4), ("(1/2)*4", 2), ("2**3", 8),
    ("x^(-1)", 0.5), ("1.5e1", 15.0), ("sqrt(4)", 2.0), ("-x*-x", 4.0),
])
def test_parse_values(text, value):
    assert evaluate(parse(text), {"x": 2.0}) == pytest.approx(value)


@pytest.mark.parametrize("text,pos", [("x +", 3), ("x*(y", 4), ("2^x", 2), ("1 2", 2), ("2^3^2", 3)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as ei:
        parse(text)
    assert ei.value.position >= pos - 1


def test_unknown_identifier_against_chart():
    with pytest.raises(UnknownIdentifierError) as ei:
        parse("x + w", chart=("x", "y"))
    assert ei.value.name == "w"


def test_printer_division_and_powers():
    assert to_text(normalize(-1 / x)) == "-1/x"
    assert to_text(normalize(x ** -2)) in ("x^(-2)", "1/x^2")


@given(polys)
@settings(max_examples=60, deadline=None)
def test_print_parse_roundtrip(e):
    n = normalize(e)
    assert normalize(parse(to_text(n))) == n


@given(polys, points)
@settings(max_examples=60, deadline=None)
def test_normalize_preserves_value(e, p):
    assert _at(normalize(e), p) == pytest.approx(_at(e, p), rel=1e-9, abs=1e-9)


# normalization ------------------------------------------------------------------

def test_normal_form_canonical():
    a = normalize((x + y) ** 2 - x * x - y * y)
    assert a == normalize(2 * x * y)
    assert normalize((x ** 2 - 1) / (x - 1)) == normalize(x + 1)
    assert normalize(x - x) == ZERO
    assert normalize(sqrt(x) * sqrt(x)) == x


def test_constants():
    assert is_constant(normalize(Rational(Fraction(3, 4)) + ONE))
    assert constant_value(normalize(Rational(Fraction(3, 4)) + ONE)) == Fraction(7, 4)


# differentiation: two independent oracles ----------------------------------------

@given(polys, points)
@settings(max_examples=60, deadline=None)
def test_derivative_matches_finite_difference(e, p):
    d = differentiate(e, "x")
    h = 1e-5
    fd = (_at(e, (p[0] + h, p[1], p[2])) - _at(e, (p[0] - h, p[1], p[2]))) / (2 * h)
    assert _at(d, p) == pytest.approx(fd, rel=1e-5, abs=1e-4)


@given(polys)
@settings(max_examples=40, deadline=None)
def test_derivative_matches_sympy(e):
    sx = sympy.Symbol("x")
    ours = sympy.sympify(to_text(differentiate(e, "x")).replace("^", "**"))
    ref = sympy.diff(sympy.sympify(to_text(e).replace("^", "**")), sx)
    assert sympy.simplify(ours - ref) == 0


def test_transcendental_derivatives():
    assert is_zero(differentiate(sin(x) * cos(x), "x") - (cos(x) ** 2 - sin(x) ** 2)).is_zero
    assert is_zero(differentiate(exp(x * y), "x") - y * exp(x * y)).is_zero
    assert is_zero(differentiate(log(x), "x") - 1 / x).is_zero
    assert is_zero(differentiate(sqrt(x), "x") - 1 / (2 * sqrt(x))).is_zero


def test_substitute():
    e = substitute(x * y + z, {"x": y + 1, "z": Rational(Fraction(2))})
    assert e == normalize(y * y + y + 2)


# numeric evaluation and zero testing ------------------------------------------

def test_domain_errors_name_subexpression():
    with pytest.raises(DomainError):
        evaluate(1 / x, {"x": 0.0})
    with pytest.raises(DomainError):
        evaluate(log(x), {"x": -1.0})
    with pytest.raises(DomainError):
        evaluate(sqrt(x), {"x": -1.0})
    with pytest.raises(UnboundSymbolError):
        evaluate(x + y, {"x": 1.0})


def test_compiled_matches_evaluate():
    exprs = (x * y + sin(z), sqrt(x * x + 1), exp(-y))
    fn = compile_exprs(exprs, NAMES)
    p = (0.3, -0.7, 1.1)
    assert np.allclose(fn(*p), [_at(e, p) for e in exprs])


def test_zero_verdicts():
    assert is_zero(normalize((x + 1) ** 2 - x * x - 2 * x - 1)).kind == "ProvedZero"
    v = is_zero(sin(x) ** 2 + cos(x) ** 2 - 1)
    assert v.kind == "NumericZero" and v.samples == 50
    v = is_zero(x * y - y * x + x)
    assert not v.is_zero and v.witness


def test_zero_is_seeded():
    e = sin(x) ** 2 + cos(x) ** 2 - 1 + y * 0
    a = is_zero(e, seed=3)
    b = is_zero(e, seed=3)
    assert a.to_dict() == b.to_dict()


def test_zero_all_reports_worst_label():
    v = is_zero_all([normalize(x - x), normalize(x * x + 1)], labels=["a", "b"])
    assert not v.is_zero and v.label == "b"


def test_undecidable_when_domain_is_empty():
    with pytest.raises(UndecidableError):
        is_zero(sqrt(-x * x - 1) + sin(x))


# linear algebra -------------------------------------------------------------------

def test_symbolic_det_and_inverse():
    M = [[x, ONE], [ONE, y]]
    assert linalg.det(M) == normalize(x * y - 1)
    inv = linalg.inverse(M)
    prod = linalg.matmul(M, inv)
    assert prod[0][0] == ONE and prod[0][1] == ZERO and prod[1][1] == ONE


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_numeric_solve_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=5)
    assert np.allclose(linalg.solve(A, b), np.linalg.solve(A, b))
    assert linalg.numeric_rank(A) == 5
    assert linalg.numeric_rank(np.outer(b, b)) == 1
