import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poissonkit.dirac import ConstraintSet
from poissonkit.dynamics import (commutativity_check, flow_map, integrate, integrate_dirac,
                                 integrate_multiplier, series_solution)
from poissonkit.errors import InputError, NumericAbort, OffSurfaceError
from poissonkit.structures import canonical, hamiltonian_field, so3

HO = "(q^2 + p^2)/2"


def test_oscillator_matches_exact():
    tr = integrate(canonical(1), HO, [1.0, 0.0], 2.0, 1e-2)
    t = tr.times
    assert np.allclose(tr.states[:, 0], np.cos(t), atol=1e-8)
    assert np.allclose(tr.states[:, 1], -np.sin(t), atol=1e-8)
    assert tr.drift("H") < 1e-9


def test_rk4_fourth_order():
    errs = []
    for h in (0.1, 0.05):
        z = integrate(canonical(1), HO, [1.0, 0.0], 1.0, h).final
        errs.append(abs(z[0] - math.cos(1.0)))
    assert 12 < errs[0] / errs[1] < 20


def test_step_must_divide_interval():
    with pytest.raises(InputError):
        integrate(canonical(1), HO, [1, 0], 1.0, 0.3)
    with pytest.raises(InputError):
        integrate(canonical(1), HO, [1, 0], 1.0, -0.1)


def test_domain_failure_is_numeric_abort():
    with pytest.raises(NumericAbort, match="tau="):
        integrate(canonical(1), "p^2/2 + sqrt(q)", [0.01, -1.0], 1.0, 0.01)


def test_csv_layout():
    tr = integrate(so3(), "z3", [1, 0, 0], 0.1, 0.05, casimirs=["z1^2 + z2^2 + z3^2"])
    lines = tr.to_csv().splitlines()
    assert lines[0] == "tau,z1,z2,z3,H,K1"
    assert len(lines) == 4
    assert float(lines[-1].split(",")[0]) == pytest.approx(0.1)


vec = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3)


@given(vec, vec)
@settings(max_examples=10, deadline=None)
def test_lie_poisson_flow_keeps_casimir(b, z0):
    H = " + ".join(f"({bi!r})*z{i + 1}" for i, bi in enumerate(b))
    tr = integrate(so3(), H, list(z0), 1.0, 0.01, casimirs=["z1^2 + z2^2 + z3^2"])
    assert tr.drift("K1") < 1e-10
    assert tr.drift("H") < 1e-10


# constrained modes -------------------------------------------------------------

def _sphere():
    P = canonical(3, coords=("x1", "x2", "x3", "p1", "p2", "p3"))
    C = ConstraintSet(P.chart, ["x1^2 + x2^2 + x3^2 - 1", "x1*p1 + x2*p2 + x3*p3"])
    return P, C


def test_off_surface_start_rejected():
    P, C = _sphere()
    with pytest.raises(OffSurfaceError):
        integrate_dirac(P, "(p1^2+p2^2+p3^2)/2", C, [1.1, 0, 0, 0, 1, 0], 0.1, 0.01)


def test_great_circle():
    P, C = _sphere()
    tr = integrate_dirac(P, "(p1^2+p2^2+p3^2)/2", C, [1, 0, 0, 0, 1, 0], 1.0, 1e-3)
    t = tr.times
    assert np.allclose(tr.states[:, 0], np.cos(t), atol=1e-9)
    assert np.allclose(tr.states[:, 1], np.sin(t), atol=1e-9)
    m = integrate_multiplier(P, "(p1^2+p2^2+p3^2)/2", C, [1, 0, 0, 0, 1, 0], 1.0, 1e-3)
    assert np.max(np.abs(m.states - tr.states)) < 1e-10
    # lambda1 = p.p / (2 x.x) = 1/2 on the unit circle at unit speed
    assert np.allclose(m.monitors["lambda1"], 0.5, atol=1e-8)


# series and flows -------------------------------------------------------------------

def test_series_order_zero_echoes_start():
    s = series_solution(canonical(1), HO, [0.3, 0.4], 0.5, 0)
    assert np.allclose(np.asarray(s), [0.3, 0.4])


def test_series_truncation():
    s = series_solution(canonical(1), HO, [1.0, 0.0], 0.2, 6)
    assert abs(s[0] - math.cos(0.2)) < 0.2 ** 8 / math.factorial(8) * 1.01
    with pytest.raises(InputError):
        series_solution(canonical(1), HO, [1.0, 0.0], 0.2, 13)


def test_flow_map_exact_translation():
    P = canonical(2)
    V = hamiltonian_field(P, "q1")
    z = flow_map(V, 0.7, 0.1, [0, 0, 1, 1])
    assert np.allclose(z, [0, 0, 0.3, 1])


def test_commutativity_gap():
    P = canonical(2)
    r = commutativity_check(hamiltonian_field(P, "q1"), hamiltonian_field(P, "q2"), 0.5, 0.5,
                            [0.1, 0.2, 0.3, 0.4], 0.01)
    assert r["gap"] < 1e-12 and r["bracket_norm"] == 0
    # free motion and a constant force: the gap is exactly tau*lambda*|[V,U]|
    V, U = hamiltonian_field(P, "p1^2/2"), hamiltonian_field(P, "q1")
    r = commutativity_check(V, U, 0.5, 0.4, [0.1, 0.2, 0.3, 0.4], 0.01)
    assert r["bracket_norm"] == pytest.approx(1.0)
    assert r["gap"] == pytest.approx(0.2, rel=1e-9)
