import pytest
from hypothesis import given, settings, strategies as st

from poissonkit.dirac import ConstraintSet
from poissonkit.errors import DimensionError, NotACasimir, NotFirstIntegral
from poissonkit.reduction import (diagram_closure_check, first_integral_reduction, induced_bracket,
                                  poisson_submanifold_check, prescribe_casimirs, restrict_function)
from poissonkit.structures import Chart, PoissonStructure, bracket, canonical, so3
from poissonkit.symcore import ONE, ZERO, Symbol, normalize, parse, sqrt

z1, z2, z3 = (Symbol(f"z{i}") for i in (1, 2, 3))
C3 = Chart(("z1", "z2", "z3"))


def so3_sphere():
    P = so3()
    K = ConstraintSet(P.chart, ["z1^2 + z2^2 + z3^2 - 1"], (("z3",), ["sqrt(1 - z1^2 - z2^2)"]))
    return P, K


def sphere6():
    P = canonical(3, coords=("x1", "x2", "x3", "p1", "p2", "p3"))
    C = ConstraintSet(P.chart, ["x1^2 + x2^2 + x3^2 - 1", "x1*p1 + x2*p2 + x3*p3"],
                      (("x3", "p3"), ["sqrt(1 - x1^2 - x2^2)",
                                      "-(x1*p1 + x2*p2)/sqrt(1 - x1^2 - x2^2)"]))
    return P, C


def base(w="1"):
    return PoissonStructure(Chart(("z2", "z3"), params=("K1",)), {(0, 1): w})


def test_induced_on_so3_sphere():
    P, K = so3_sphere()
    S = induced_bracket(P, K)
    # omega^{12} = z3, restricted to the upper hemisphere
    assert normalize(S.structure.entry(0, 1) - sqrt(1 - z1 ** 2 - z2 ** 2)) == ZERO
    assert S.report["tangency identity"].is_zero
    assert poisson_submanifold_check(P, S).is_zero


def test_induced_rejects_non_casimir():
    P = so3()
    K = ConstraintSet(P.chart, ["z1 - 1"], (("z1",), ["1"]))
    with pytest.raises(NotACasimir):
        induced_bracket(P, K)


def test_restrict_function():
    _, K = so3_sphere()
    f = restrict_function("z3^2 + z1", K.parametrization)
    assert f.chart.coords == ("z1", "z2")
    assert f.expr == normalize(1 - z1 ** 2 - z2 ** 2 + z1)


@pytest.mark.parametrize("system", ["qp", "sphere"])
def test_diagram_closure(system):
    if system == "qp":
        P = canonical(2)
        C = ConstraintSet(P.chart, ["q1", "p1"], (("q1", "p1"), ["0", "0"]))
    else:
        P, C = sphere6()
    res = diagram_closure_check(P, C)
    assert res["passed"] and res["points"] == 25 and res["max_abs"] <= 1e-8


def test_first_integral_reduction():
    P = canonical(2)
    C = ConstraintSet(P.chart, ["q1", "p1"], (("q1", "p1"), ["0", "0"]))
    S = first_integral_reduction(P, "p2^2/2 + q2^2/2", C)
    assert S.report["reduced field"].is_zero
    assert S.hamiltonian.expr == normalize(parse("p2^2/2 + q2^2/2"))
    with pytest.raises(NotFirstIntegral):
        first_integral_reduction(P, "q2 + p1", C)


# prescribed Casimirs -----------------------------------------------------------

def test_example_71():
    K = z1 * (1 + z2 ** 2) - z3
    pr = prescribe_casimirs(C3, [K], ["z1"], base())
    W = pr.structure
    # omega^{ij} = eps^{ijk} d_k K / d_1 K
    dK = [parse(t, C3.coords) for t in ("1 + z2^2", "2*z1*z2", "-1")]
    assert normalize(W.entry(1, 2) - dK[0] / dK[0]) == ZERO
    assert normalize(W.entry(0, 1) - dK[2] / dK[0]) == ZERO
    assert normalize(W.entry(0, 2) + dK[1] / dK[0]) == ZERO
    assert all(v.is_zero for v in pr.report.values())
    # restriction to K = 0 gives the canonical pair
    C = ConstraintSet(C3, [K], (("z1",), ["z3/(1 + z2^2)"]))
    S = induced_bracket(W, C)
    assert S.structure.entry(0, 1) == ONE


def test_example_72():
    K = (z1 ** 2 + z2 ** 2 + z3 ** 2) / 2 - 1
    W = prescribe_casimirs(C3, [K], ["z1"], base()).structure
    # omega^{ij} = eps^{ijk} z^k / z1
    assert normalize(W.entry(0, 1) - z3 / z1) == ZERO
    assert normalize(W.entry(0, 2) + z2 / z1) == ZERO
    assert W.entry(1, 2) == ONE


def test_prescribed_with_casimir_dependent_base():
    # W0 may depend on the Casimir value K1
    K = z1 * (1 + z2 ** 2) - z3
    W = prescribe_casimirs(C3, [K], ["z1"], base("1 + K1^2")).structure
    assert bracket(W, K, "z2") == ZERO
    assert W.jacobi_verdict.is_zero


def test_prescribed_dimension_parity():
    chart = Chart(("a", "b", "c", "d"))
    with pytest.raises(DimensionError):
        prescribe_casimirs(chart, ["a + b"], ["a"], PoissonStructure(Chart(("b", "c", "d")), {}))


small = st.integers(-2, 2)


@given(small, small, small, small)
@settings(max_examples=15, deadline=None)
def test_prescribed_random_casimir(a, b, c, d):
    K = normalize(z1 * (1 + z2 ** 2) + a * z2 * z3 + b * z3 ** 2 + c * z2 ** 3 + d * z3)
    pr = prescribe_casimirs(C3, [K], ["z1"], base())
    assert pr.report["casimir K1"].is_zero
    assert pr.report["jacobi"].is_zero
    assert pr.report["closed form"].is_zero
    assert pr.report["block structure"].is_zero
