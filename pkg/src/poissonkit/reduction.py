"""Induced brackets on submanifolds and brackets with prescribed Casimirs."""

from itertools import combinations

import numpy as np

from .dirac import dirac_bracket, second_class_check, surface_zero
from .errors import (ChartMismatch, DegenerateDelta, DimensionError, InputError, NotACasimir,
                     NotFirstIntegral, SingularMatrixError, VerificationError)
from .settings import resolve
from .structures import (Chart, PoissonStructure, ScalarField, _expr_on, bracket, casimir_check,
                         hamiltonian_field, levi_civita)
from .symcore import (ZERO, Add, Mul, Rational, Symbol, RatContext, differentiate,
                      is_zero_all, normalize, substitute)
from .symcore import linalg
from .symplectic import Embedding, invert, pullback, SYMBOLIC_LIMIT


class SubmanifoldStructure:
    """Induced structure on the kept coordinates of a parametrized surface."""

    def __init__(self, structure, parent, parametrization, report=None, hamiltonian=None):
        self.structure = structure
        self.parent = parent
        self.parametrization = parametrization
        self.report = report or {}
        self.hamiltonian = hamiltonian

    @property
    def chart(self):
        return self.structure.chart

    def restrict(self, A):
        return restrict_function(_expr_on(self.parent.chart, A), self.parametrization)


def _sub_chart(param, name="surface"):
    return Chart(param.kept, param.chart.params, name=name)


def restrict_function(A, param):
    """A(f(z^a), z^a) as a field on the kept coordinates."""
    if isinstance(A, ScalarField):
        if A.chart != param.chart:
            raise ChartMismatch("function and parametrization live on different charts")
        A = A.expr
    A = param.chart.expr(A)
    return ScalarField(_sub_chart(param), param.restrict(A))


def _restricted_block(P, param):
    idx = [P.chart.index(c) for c in param.kept]
    entries = {}
    for a, b in combinations(range(len(idx)), 2):
        e = param.restrict(P.entry(idx[a], idx[b]))
        if e != ZERO:
            entries[(a, b)] = e
    return entries


def induced_bracket(P, K, settings=None, provenance="induced"):
    """omega-bar^{ab} = omega^{ab}(f, z^a) on a Casimir surface."""
    s = resolve(settings) if settings is not None else P.settings
    if K.chart != P.chart:
        raise ChartMismatch("Casimir set lives on a different chart")
    if K.parametrization is None:
        raise InputError("induced bracket needs a parametrization of the surface")
    report = {}
    for b, k in enumerate(K.exprs):
        v = casimir_check(P, k, s)
        if not v.is_zero:
            raise NotACasimir(f"K{b + 1} = {k} is not a Casimir function", v)
        report[f"casimir K{b + 1}"] = v
    param = K.parametrization
    chart = _sub_chart(param)
    S = PoissonStructure(chart, _restricted_block(P, param), provenance, s)
    report["jacobi"] = S.jacobi().verdict
    # omega^{i alpha} = omega^{ib} d_b f^alpha on the surface
    diffs, labels = [], []
    for i, ci in enumerate(P.chart.coords):
        for al, f in zip(param.solved, param.f):
            ia = P.chart.index(al)
            terms = [Mul((P.entry(i, P.chart.index(b)), differentiate(f, b)))
                     for b in param.kept if differentiate(f, b) != ZERO]
            rhs = normalize(Add(terms)) if len(terms) > 1 else (normalize(terms[0]) if terms else ZERO)
            diffs.append(normalize(P.entry(i, ia) - rhs))
            labels.append(f"omega^{{{ci},{al}}}-omega^{{{ci},b}}d_b f")
    report["tangency identity"] = surface_zero(diffs, param, max(s.tol, 1e-9), labels=labels)
    if not report["tangency identity"].is_zero:
        raise VerificationError("induced bracket identity fails on the surface", report["tangency identity"])
    return SubmanifoldStructure(S, P, param, report)


def diagram_closure_check(P, C, settings=None, points=25, tol=1e-8):
    """Compare Dirac-then-restrict with pullback-then-invert at surface points."""
    s = resolve(settings) if settings is not None else P.settings
    if len(C) == 0:
        return {"passed": True, "max_abs": 0.0, "points": 0, "entries": 0}
    if C.parametrization is None:
        raise InputError("diagram closure needs a parametrization")
    param = C.parametrization
    D = dirac_bracket(P, C, s)
    S = induced_bracket(D.structure, C, s)
    sub = S.chart
    E = Embedding(sub, P.chart, param.lift_exprs(), s)
    Ff = pullback(invert(P, s), E, s)
    worst = 0.0
    used = 0
    for p in param.kept_points()[:points]:
        try:
            Wf = linalg.numeric_inverse(Ff.numeric(p))
        except SingularMatrixError:
            continue
        Wd = S.structure.numeric(p)
        worst = max(worst, float(np.max(np.abs(Wf - Wd))))
        used += 1
    return {"passed": used > 0 and worst <= tol, "max_abs": worst, "points": used,
            "entries": sub.dim * (sub.dim - 1) // 2, "dirac": D, "induced": S, "pullback": Ff}


# prescribed Casimirs -----------------------------------------------------------

class PrescribedResult:
    def __init__(self, structure, a, a_tilde, report, closed_form=None):
        self.structure = structure
        self.a = a
        self.a_tilde = a_tilde
        self.report = report
        self.closed_form = closed_form


def prescribe_casimirs(chart, K, solved, W0, settings=None):
    """Bracket on ``chart`` having each K^b as a Casimir.

    New coordinates are (K^b, z^a): each solved coordinate is replaced by its
    K, the kept ones stay.  ``W0`` lives on the kept coordinates; its entries
    may also mention parameters named ``K1..Kp`` (values of the Casimirs).
    The result is omega = a~ W a~^T with a~ = (d phi/d z)^{-1}.
    """
    s = resolve(settings)
    K = [chart.expr(k) for k in K]
    solved = [str(c) for c in solved]
    if len(K) != len(solved):
        raise InputError("one solved coordinate per Casimir")
    n, p = chart.dim, len(K)
    if n > SYMBOLIC_LIMIT:
        raise DimensionError(f"prescribed construction is limited to n <= {SYMBOLIC_LIMIT}")
    if (n - p) % 2:
        raise DimensionError(f"n - p = {n - p} must be even")
    kept = [c for c in chart.coords if c not in solved]
    if tuple(W0.chart.coords) != tuple(kept):
        raise ChartMismatch(f"W0 must live on the kept coordinates {kept}")
    if not W0.jacobi().verdict.is_zero:
        raise VerificationError("W0 fails the Jacobi identity", W0.jacobi().verdict)
    kmap = {f"K{b + 1}": K[b] for b in range(p)}
    w0 = {key: substitute(e, kmap) for key, e in W0.upper().items()}

    # a[k'][i] = d phi^{k'} / d z^i, phi = K in solved slots, identity elsewhere
    a = []
    for c in chart.coords:
        if c in solved:
            k = K[solved.index(c)]
            a.append([differentiate(k, x) for x in chart.coords])
        else:
            a.append([Rational(1) if x == c else ZERO for x in chart.coords])
    det_a, at = linalg.det_and_inverse(a)
    if at is None:
        raise SingularMatrixError(f"d phi/d z is singular (det = {det_a})")
    kept_idx = [chart.index(c) for c in kept]
    ctx = RatContext([x for r in at for x in r] + list(w0.values()))
    ate = [[ctx.to_el(x) for x in r] for r in at]
    W = {}
    for (u, v), e in w0.items():
        W[(kept_idx[u], kept_idx[v])] = ctx.to_el(e)
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            acc = ctx.K.zero
            for (k, l), w in W.items():
                if ate[i][k] and ate[j][l]:
                    acc = acc + ate[i][k] * w * ate[j][l]
                if ate[i][l] and ate[j][k]:
                    acc = acc - ate[i][l] * w * ate[j][k]
            e = ctx.to_expr(acc)
            if e != ZERO:
                entries[(i, j)] = e
    P = PoissonStructure(chart, entries, "prescribed", s)
    report = {"jacobi": P.jacobi().verdict}
    for b, k in enumerate(K):
        v = casimir_check(P, k, s)
        report[f"casimir K{b + 1}"] = v
        if not v.is_zero:
            raise VerificationError(f"K{b + 1} is not a Casimir of the prescribed bracket", v)
    report["block structure"] = _block_cross_check(P, K, solved, kept, w0, chart, s)
    closed = None
    if n == 3 and p == 1:
        closed = casimir_closed_form_3d(chart, K[0], solved[0], w0.get((0, 1), ZERO))
        diffs = [normalize(P.entry(i, j) - closed[i][j]) for i in range(3) for j in range(i + 1, 3)]
        report["closed form"] = is_zero_all(diffs, s.tol, s.samples, s.seed)
    return PrescribedResult(P, a, at, report, closed)


def _block_cross_check(P, K, solved, kept, w0, chart, s):
    """Rebuild omega from the explicit block formula and compare.

    With b_{gamma beta} = d K^gamma / d z^beta and c_{gamma a} = d K^gamma / d z^a,
    the solved coordinates move along the surface as dz^beta/dz^a = -(b^{-1} c)_{beta a}.
    """
    b = [[differentiate(k, x) for x in solved] for k in K]
    c = [[differentiate(k, x) for x in kept] for k in K]
    binv = linalg.inverse(b)
    m = linalg.matmul(binv, c)       # (b^{-1} c)[beta][a]
    # t[i][a] = d z^i / d z'^a along the kept directions
    t = {}
    for x in chart.coords:
        if x in kept:
            t[x] = [Rational(1) if y == x else ZERO for y in kept]
        else:
            t[x] = [normalize(-m[solved.index(x)][a]) for a in range(len(kept))]
    ka = len(kept)
    W = [[ZERO] * ka for _ in range(ka)]
    for (u, v), e in w0.items():
        W[u][v] = e
        W[v][u] = normalize(-e)
    diffs = []
    for i, j in combinations(range(chart.dim), 2):
        ti, tj = t[chart.coords[i]], t[chart.coords[j]]
        terms = [Mul((ti[u], W[u][v], tj[v])) for u in range(ka) for v in range(ka)
                 if ti[u] != ZERO and W[u][v] != ZERO and tj[v] != ZERO]
        ref = ZERO if not terms else normalize(Add(terms) if len(terms) > 1 else terms[0])
        diffs.append(normalize(P.entry(i, j) - ref))
    return is_zero_all(diffs, s.tol, s.samples, s.seed)


def casimir_closed_form_3d(chart, K, solved, w):
    """omega^{ij} = w eps^{ijk} d_k K / (eps^{a b s} d_s K) for n = 3, one Casimir.

    Here (a, b) are the kept coordinates in chart order and s the solved one;
    with s = z1 and w = 1 this is eps^{ijk} d_k K / d_1 K.
    """
    s_idx = chart.index(solved)
    a_idx, b_idx = [i for i in range(3) if i != s_idx]
    grad = [differentiate(K, c) for c in chart.coords]
    den = normalize(Rational(levi_civita(a_idx, b_idx, s_idx)) * grad[s_idx])
    out = [[ZERO] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            terms = [Mul((Rational(levi_civita(i, j, k)), grad[k])) for k in range(3) if levi_civita(i, j, k)]
            if terms:
                out[i][j] = normalize(w * Add(terms) / den) if len(terms) > 1 else normalize(w * terms[0] / den)
    return out


def poisson_submanifold_check(P, S, pairs=None, settings=None):
    """{A,B}_parent on the surface minus {A-bar, B-bar}_S, at surface points."""
    s = resolve(settings) if settings is not None else P.settings
    param = S.parametrization
    if pairs is None:
        pairs = [(Symbol(a), Symbol(b)) for a, b in combinations(param.kept, 2)]
    diffs, labels = [], []
    for A, B in pairs:
        a = _expr_on(P.chart, A)
        b = _expr_on(P.chart, B)
        lhs = bracket(P, a, b)
        rhs = bracket(S.structure, param.restrict(a), param.restrict(b))
        diffs.append(normalize(lhs - rhs))
        labels.append(f"{{{a},{b}}}")
    return surface_zero(diffs, param, max(s.tol, 1e-9), labels=labels)


def first_integral_reduction(P, H, C, settings=None):
    """Reduce to the surface of second-class first integrals Phi.

    Returns a SubmanifoldStructure carrying omega_D^{ab}(f, z^a) and the
    restricted Hamiltonian H-hat.
    """
    s = resolve(settings) if settings is not None else P.settings
    h = _expr_on(P.chart, H)
    if len(C) == 0:
        return SubmanifoldStructure(P, P, None, {}, ScalarField(P.chart, h))
    if C.parametrization is None:
        raise InputError("reduction needs a parametrization")
    brs = [bracket(P, phi, h) for phi in C]
    v = is_zero_all(brs, s.tol, s.samples, s.seed, labels=[f"{{Phi{a + 1},H}}" for a in range(len(C))])
    if not v.is_zero:
        raise NotFirstIntegral(f"constraints are not first integrals: {v.label} = {v.value:.6g} at {v.witness}", v)
    sc = second_class_check(P, C, on_surface=True, settings=s)
    if not sc.second_class:
        raise DegenerateDelta("det Delta vanishes on the surface", sc.det, sc.verdict)
    D = dirac_bracket(P, C, s)
    param = C.parametrization
    chart = _sub_chart(param)
    S = PoissonStructure(chart, _restricted_block(D.structure, param), "induced", s)
    Hh = ScalarField(chart, param.restrict(h))
    X = hamiltonian_field(P, h)
    Xr = hamiltonian_field(S, Hh)
    diffs = [normalize(X[P.chart.index(a)] - Xr[i]) for i, a in enumerate(param.kept)]
    report = {"first integrals": v, "jacobi": S.jacobi().verdict,
              "reduced field": surface_zero(diffs, param, max(s.tol, 1e-9),
                                            labels=[f"X^{a}" for a in param.kept])}
    return SubmanifoldStructure(S, P, param, report, Hh)
