"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed together at the end of the pytest run.
"""

from functools import lru_cache

import numpy as np

from poissonkit.cli import corpus_path
from poissonkit.cli.problem import load
from poissonkit.dirac import ConstraintSet, consistency_chain, dirac_bracket, second_class_check
from poissonkit.dynamics import (commutativity_check, integrate, integrate_dirac,
                                 integrate_multiplier, series_solution)
from poissonkit.reduction import diagram_closure_check, induced_bracket, prescribe_casimirs
from poissonkit.settings import Settings
from poissonkit.structures import (Chart, CoordinateMap, PoissonStructure, bracket, canonical,
                                   change_coordinates, hamiltonian_field, jacobi_residual, so3)
from poissonkit.symcore import (ONE, ZERO, Rational, Symbol, box_points, compile_exprs, is_zero_all,
                                normalize, parse)
from poissonkit.symplectic import SymplecticForm, curl, invert, potential

TOL = 1e-9


def _sphere_problem():
    return load(corpus_path("sphere"))


# 1 -------------------------------------------------------------------------------

def test_c01_jacobi_suite(criterion):
    can = canonical(2).jacobi_verdict
    lp = so3().jacobi_verdict
    bad = jacobi_residual(PoissonStructure(Chart(("z1", "z2", "z3")), {(0, 1): "1", (0, 2): "z1"}))
    ok = (can.kind == "ProvedZero" and lp.kind == "ProvedZero" and bad.verdict.kind == "NonZero"
          and bad.verdict.label == "J^{z1,z2,z3}"
          and bad.residuals[(0, 1, 2)] == ONE)
    criterion(1, ok, f"canonical {can.kind}, so(3) {lp.kind}, counterexample J^123 = "
                     f"{bad.residuals[(0, 1, 2)]}")
    assert ok


# 2 -------------------------------------------------------------------------------

def _maps(src):
    w = Chart(("w1", "w2", "w3"))
    m1 = CoordinateMap(src, w, ["z1", "z2 + z1^2", "z3 + z2^3"],
                       ["w1", "w2 - w1^2", "w3 - (w2 - w1^2)^3"])
    m2 = CoordinateMap(src, w, ["z1", "z2 + sin(z1)", "z3 + z1*z2"],
                       ["w1", "w2 - sin(w1)", "w3 - w1*(w2 - sin(w1))"])
    return m1, m2


def _numeric_max(exprs, coords, n=50, seed=0):
    exprs = tuple(exprs) or (ZERO,)
    pts = box_points(coords, n, seed, exprs=exprs)
    fn = compile_exprs(exprs, coords)
    return max(max(abs(v) for v in fn(*[pt[c] for c in coords])) for pt in pts), len(pts)


def test_c02_covariance(criterion):
    s = Settings(tol=TOL, samples=50, seed=0)
    P = so3(settings=s)
    out = []
    for M in _maps(P.chart):
        Q = change_coordinates(P, M, s)
        # symbolic verdict and an independent evaluation at 50 seeded points
        worst, n = _numeric_max(jacobi_residual(Q).residuals.values(), Q.chart.coords)
        out.append((Q.jacobi_verdict, worst, n))
    ok = all(v.is_zero and w <= TOL and n == 50 for v, w, n in out)
    criterion(2, ok, ", ".join(f"{v.kind}, numeric max {w:.1e} at {n} pts" for v, w, n in out))
    assert ok


# 3 -------------------------------------------------------------------------------

def test_c03_dirac_exactness(criterion):
    P = canonical(2)
    D = dirac_bracket(P, ConstraintSet(P.chart, ["q1", "p1"])).structure
    ref = canonical(2).matrix()
    qp = [normalize(D.entry(i, j) - (ref[i][j] if {i, j} == {1, 3} else ZERO))
          for i in range(4) for j in range(4)]
    v1 = is_zero_all(qp)

    sp = _sphere_problem()
    S = dirac_bracket(sp.structure(), sp.constraint_set()).structure
    x = [Symbol(f"x{i}") for i in (1, 2, 3)]
    p = [Symbol(f"p{i}") for i in (1, 2, 3)]
    r2 = x[0] ** 2 + x[1] ** 2 + x[2] ** 2
    diffs = [normalize(bracket(S, x[i], p[j]) - ((ONE if i == j else ZERO) - x[i] * x[j] / r2))
             for i in range(3) for j in range(3)]
    v2 = is_zero_all(diffs)
    ok = v1.kind == "ProvedZero" and v2.kind == "ProvedZero"
    criterion(3, ok, f"(q1,p1) {v1.kind}, sphere {v2.kind}")
    assert ok


# 4 -------------------------------------------------------------------------------

DIRAC_CORPUS = ["sphere", "qp_elimination", "so3_dirac"]


def test_c04_casimir_property(criterion):
    kinds = {}
    for name in DIRAC_CORPUS:
        prob = load(corpus_path(name))
        D = dirac_bracket(prob.structure(), prob.constraint_set())
        kinds[name] = D.report["casimir"].kind
    ok = all(k == "ProvedZero" for k in kinds.values())
    criterion(4, ok, ", ".join(f"{n} {k}" for n, k in kinds.items()))
    assert ok


# 5 -------------------------------------------------------------------------------

def test_c05_degenerate_base(criterion):
    P = so3()
    D = dirac_bracket(P, ConstraintSet(P.chart, ["z1", "z2"])).structure
    worst, n = _numeric_max(jacobi_residual(D).residuals.values(), P.chart.coords, n=100)
    ok = n == 100 and worst <= TOL
    criterion(5, ok, f"max |J| = {worst:.1e} at {n} points")
    assert ok


# 6 -------------------------------------------------------------------------------

def test_c06_diagram_closure(criterion):
    out = {}
    for name in ("qp_elimination", "sphere"):
        prob = load(corpus_path(name))
        r = diagram_closure_check(prob.structure(), prob.constraint_set(), points=25, tol=1e-8)
        out[name] = r
    ok = all(r["passed"] and r["points"] == 25 for r in out.values())
    criterion(6, ok, ", ".join(f"{n} max {r['max_abs']:.1e} ({r['points']} pts)" for n, r in out.items()))
    assert ok


# 7 -------------------------------------------------------------------------------

def test_c07_consistency_chain(criterion):
    P = canonical(1)
    a = consistency_chain(P, "p^2/2", ConstraintSet(P.chart, ["q"]))
    b = consistency_chain(P, "q", ConstraintSet(P.chart, ["p"]))
    sc = second_class_check(P, a.constraints)
    ok = (a.status == "terminated" and [str(e) for e in a.constraints.exprs] == ["q", "p"]
          and a.constraints.origins[1] == "secondary(step 1)" and sc.second_class
          and b.status == "contradiction" and b.witness == Rational(-1))
    criterion(7, ok, f"p^2/2: {a.status} with {[str(e) for e in a.constraints.exprs]}, "
                     f"second class {sc.second_class}; q: {b.status} (witness {b.witness})")
    assert ok


# 8, 9 ------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _sphere_run(mode, h):
    prob = _sphere_problem()
    integ = prob.integrator
    f = integrate_dirac if mode == "dirac" else integrate_multiplier
    return f(prob.structure(), prob.hamiltonian, prob.constraint_set(), integ["z0"], 10.0, h)


def test_c08_multiplier_equivalence(criterion):
    d = _sphere_run("dirac", 1e-3)
    m = _sphere_run("multiplier", 1e-3)
    gap = float(np.max(np.abs(d.states - m.states)))
    res = m.metadata["lambda_residual_max"]
    ok = gap <= 1e-6 and res <= 1e-8
    criterion(8, ok, f"max componentwise gap {gap:.1e}, lambda residual {res:.1e}")
    assert ok


def test_c09_constraint_tangency(criterion):
    a = _sphere_run("dirac", 1e-3)
    b = _sphere_run("dirac", 5e-4)
    d1, d2 = a.max_abs("Phi1"), a.max_abs("Phi2")
    worst_a = max(d1, d2)
    worst_b = max(b.max_abs("Phi1"), b.max_abs("Phi2"))
    ratio = worst_a / worst_b if worst_b > 0 else float("inf")
    ok = d1 <= 1e-7 and d2 <= 1e-7 and ratio >= 10
    criterion(9, ok, f"|x.x-1| {d1:.1e}, |x.p| {d2:.1e}, halving h reduces drift {ratio:.0f}x")
    assert ok


# 10 --------------------------------------------------------------------------------

def test_c10_precession(criterion):
    prob = load(corpus_path("so3_precession"))
    tr = integrate(prob.structure(), prob.hamiltonian, [1, 0, 0], 20.0, 1e-3, casimirs=prob.casimirs)
    t = tr.times
    ref = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    err = float(np.max(np.abs(tr.states - ref)))
    drift = tr.drift("K1")
    ok = err <= 1e-6 and drift <= 1e-8
    criterion(10, ok, f"max error {err:.1e}, |z|^2 drift {drift:.1e}")
    assert ok


# 11 --------------------------------------------------------------------------------

def test_c11_series(criterion):
    P = canonical(1)
    H = "(q^2 + p^2)/2"
    z0 = [1.0, 0.0]
    s8 = np.asarray(series_solution(P, H, z0, 0.1, 8))
    rk = integrate(P, H, z0, 0.1, 1e-3).final
    gap = float(np.max(np.abs(s8 - rk)))
    taus = np.array([0.05, 0.1, 0.2])
    slopes = {}
    for N in (2, 4, 6):
        errs = [np.max(np.abs(np.asarray(series_solution(P, H, z0, t, N)) - [np.cos(t), -np.sin(t)]))
                for t in taus]
        slopes[N] = float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    ok = gap <= 1e-10 and all(abs(slopes[N] - (N + 1)) <= 0.3 for N in slopes)
    criterion(11, ok, f"order-8 gap {gap:.1e}, slopes " + ", ".join(f"N={N}: {s:.2f}" for N, s in slopes.items()))
    assert ok


# 12 --------------------------------------------------------------------------------

def test_c12_prescribed_casimirs(criterion):
    chart = Chart(("z1", "z2", "z3"))
    z1, z2, z3 = chart.symbols
    base = PoissonStructure(Chart(("z2", "z3")), {(0, 1): "1"})
    K = z1 * (1 + z2 ** 2) - z3
    W = prescribe_casimirs(chart, [K], ["z1"], base).structure
    dK = [normalize(1 + z2 ** 2), normalize(2 * z1 * z2), Rational(-1)]
    det_a = dK[0]
    eps = {(0, 1): 2, (0, 2): 1, (1, 2): 0}
    sign = {(0, 1): 1, (0, 2): -1, (1, 2): 1}
    diffs = [normalize(W.entry(i, j) - sign[(i, j)] * dK[eps[(i, j)]] / det_a)
             for (i, j) in eps]
    v71 = is_zero_all(diffs)
    S = induced_bracket(W, ConstraintSet(chart, [K], (("z1",), ["z3/(1 + z2^2)"])))
    restricted = S.structure.entry(0, 1)

    K2 = (z1 ** 2 + z2 ** 2 + z3 ** 2) / 2 - 1
    W2 = prescribe_casimirs(chart, [K2], ["z1"], base).structure
    zs = [z1, z2, z3]
    diffs2 = [normalize(W2.entry(i, j) - sign[(i, j)] * zs[eps[(i, j)]] / z1) for (i, j) in eps]
    v72 = is_zero_all(diffs2)
    ok = v71.kind == "ProvedZero" and restricted == ONE and v72.kind == "ProvedZero"
    criterion(12, ok, f"closed form {v71.kind}, restricted {{z2,z3}} = {restricted}, "
                      f"quadratic K {v72.kind}")
    assert ok


# 13 --------------------------------------------------------------------------------

def test_c13_reduced_flow(criterion):
    prob = load(corpus_path("so3_casimir"))
    P = prob.structure()
    z0 = prob.integrator["z0"]
    amb = integrate(P, prob.hamiltonian, z0, 5.0, 1e-3)
    S = induced_bracket(P, prob.constraint_set())
    Hh = S.parametrization.restrict(prob.hamiltonian)
    red = integrate(S.structure, Hh, z0[:2], 5.0, 1e-3)
    err = float(np.max(np.abs(amb.states[:, :2] - red.states)))
    ok = err <= 1e-6
    criterion(13, ok, f"max |ambient - induced| {err:.1e} over tau = 5")
    assert ok


# 14 --------------------------------------------------------------------------------

def test_c14_flow_commutativity(criterion):
    P = canonical(2)
    z0 = [0.3, -0.2, 0.5, 0.1]
    r = commutativity_check(hamiltonian_field(P, "q1"), hamiltonian_field(P, "q2"), 1.0, 1.0, z0, 1e-2)
    V, U = hamiltonian_field(P, "p1^2/2"), hamiltonian_field(P, "q1^2/2")
    prods, gaps = [], []
    for t in (0.01, 0.02, 0.04, 0.08):
        g = commutativity_check(V, U, t, t, z0, 1e-3)
        prods.append(t * t)
        gaps.append(g["gap"])
        bn = g["bracket_norm"]
    prods, gaps = np.array(prods), np.array(gaps)
    slope = float(prods @ gaps / (prods @ prods))
    rel = abs(slope - bn) / bn
    ok = r["gap"] <= 1e-8 and rel <= 0.2
    criterion(14, ok, f"commuting gap {r['gap']:.1e}; fitted slope {slope:.4f} vs |[V,U]| {bn:.4f}")
    assert ok


# 15 --------------------------------------------------------------------------------

def _poincare_corpus():
    c2 = ("x", "y")
    c4 = ("x1", "x2", "x3", "x4")
    s4 = [Symbol(c) for c in c4]
    b = [s4[1] * s4[2] ** 2, s4[0] ** 3, s4[3] * s4[0], s4[1] ** 2 * s4[2]]
    exact = curl(b, c4)
    exact[(0, 2)] = normalize(exact[(0, 2)] + 1)
    exact[(1, 3)] = normalize(exact[(1, 3)] + 1)
    return {
        "canonical R2": invert(canonical(1)),
        "canonical R4": invert(canonical(2)),
        "area form": SymplecticForm(Chart(c2), {(0, 1): parse("1 + x^2 + y^2", c2)}),
        "cubic R4": SymplecticForm(Chart(c4), exact),
    }


def test_c15_poincare_round_trip(criterion):
    kinds = {}
    for name, F in _poincare_corpus().items():
        a = potential(F)
        c = curl(a.components, F.chart.coords)
        diffs = [normalize(c[k] - F.entry(*k)) for k in c]
        kinds[name] = is_zero_all(diffs).kind
    ok = all(k == "ProvedZero" for k in kinds.values())
    criterion(15, ok, ", ".join(f"{n} {k}" for n, k in kinds.items()))
    assert ok
