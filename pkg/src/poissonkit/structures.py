"""Poisson structures on a coordinate chart.

A :class:`PoissonStructure` stores the strictly upper triangle of the Poisson
tensor; the diagonal and lower triangle follow from antisymmetry.  The Jacobi
residual is computed and zero-tested when the structure is built.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (ChartMismatch, DimensionError, InputError, StructureConstantError,
                     VerificationError)
from .settings import resolve
from .symcore import (ZERO, Add, Mul, Rational, Symbol, as_expr, box_points,
                      compile_exprs, differentiate, is_zero_all, normalize, parse, substitute)
from .symcore.linalg import numeric_rank

PROVENANCE = ("canonical", "lie_poisson", "explicit", "dirac", "induced", "prescribed")
_MANDATORY = ("dirac", "induced", "prescribed")


class Chart:
    """Ordered coordinate names plus parameter names."""

    def __init__(self, coords, params=(), name="chart"):
        coords = tuple(str(c) for c in coords)
        if not coords:
            raise DimensionError("a chart needs at least one coordinate")
        if len(set(coords)) != len(coords):
            raise InputError(f"duplicate coordinate names in {coords}")
        params = tuple(str(p) for p in params)
        if set(params) & set(coords):
            raise InputError("parameter names clash with coordinate names")
        self.coords = coords
        self.params = params
        self.name = name

    @property
    def dim(self):
        return len(self.coords)

    @property
    def symbols(self):
        return tuple(Symbol(c) for c in self.coords)

    def index(self, name):
        return self.coords.index(str(name))

    def parse(self, text):
        return parse(text, self.coords, self.params)

    def expr(self, e):
        """Accept a string (parsed over this chart) or an expression."""
        if isinstance(e, ScalarField):
            e = e.expr
        return self.parse(e) if isinstance(e, str) else normalize(as_expr(e))

    def __eq__(self, other):
        return isinstance(other, Chart) and self.coords == other.coords and self.params == other.params

    def __hash__(self):
        return hash((self.coords, self.params))

    def __repr__(self):
        return f"Chart({self.name!r}, {list(self.coords)})"


class ScalarField:
    def __init__(self, chart, expr):
        self.chart = chart
        self.expr = chart.expr(expr)

    def __repr__(self):
        return f"ScalarField({self.expr})"


class VectorField:
    def __init__(self, chart, components):
        comps = [chart.expr(c) for c in components]
        if len(comps) != chart.dim:
            raise DimensionError(f"vector field needs {chart.dim} components, got {len(comps)}")
        self.chart = chart
        self.components = tuple(comps)

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)

    def __repr__(self):
        return f"VectorField({[str(c) for c in self.components]})"


def _expr_on(chart, A):
    if isinstance(A, ScalarField):
        if A.chart != chart:
            raise ChartMismatch(f"function lives on {A.chart!r}, expected {chart!r}")
        return A.expr
    return chart.expr(A)


class JacobiReport:
    def __init__(self, residuals, verdict):
        self.residuals = residuals
        self.verdict = verdict

    def nonzero_entries(self):
        return {k: v for k, v in self.residuals.items() if v != ZERO}


class PoissonStructure:
    """Antisymmetric tensor ``omega^{ij}`` on a chart.

    ``entries`` is either a full n x n matrix or a mapping ``(i, j) -> expr``
    with ``i < j`` (0-based).  Jacobi verification is advisory for the
    ``explicit`` tag and mandatory for derived tags.
    """

    def __init__(self, chart, entries, provenance="explicit", settings=None, check=True):
        if provenance not in PROVENANCE:
            raise InputError(f"unknown provenance {provenance!r}")
        n = chart.dim
        upper = {}
        if isinstance(entries, dict):
            for (i, j), e in entries.items():
                if not (0 <= i < j < n):
                    raise InputError(f"entry ({i}, {j}) is not strictly upper triangular")
                e = chart.expr(e)
                if e != ZERO:
                    upper[(i, j)] = e
        else:
            rows = list(entries)
            if len(rows) != n or any(len(r) != n for r in rows):
                raise DimensionError(f"matrix must be {n}x{n}")
            for i in range(n):
                for j in range(i + 1, n):
                    e = chart.expr(rows[i][j])
                    if e != ZERO:
                        upper[(i, j)] = e
        self.chart = chart
        self._upper = upper
        self.provenance = provenance
        self.settings = resolve(settings)
        self._jacobi = None
        if check:
            rep = self.jacobi()
            if provenance in _MANDATORY and not rep.verdict.is_zero:
                raise VerificationError(f"{provenance} structure fails the Jacobi identity", rep.verdict)

    @property
    def dim(self):
        return self.chart.dim

    def entry(self, i, j):
        if i == j:
            return ZERO
        if i < j:
            return self._upper.get((i, j), ZERO)
        e = self._upper.get((j, i))
        return ZERO if e is None else normalize(Mul((Rational(-1), e)))

    def __getitem__(self, ij):
        return self.entry(*ij)

    def matrix(self):
        n = self.dim
        return [[self.entry(i, j) for j in range(n)] for i in range(n)]

    def upper(self):
        return dict(self._upper)

    def jacobi(self):
        if self._jacobi is None:
            self._jacobi = jacobi_residual(self)
        return self._jacobi

    @property
    def jacobi_verdict(self):
        return self.jacobi().verdict

    def numeric(self, point):
        """Numeric matrix at a point (mapping or sequence over the chart coordinates)."""
        n = self.dim
        keys = sorted(self._upper)
        if not keys:
            return np.zeros((n, n))
        fn = compile_exprs(tuple(self._upper[k] for k in keys), self.chart.coords)
        vals = fn(*_coords_of(self.chart, point))
        M = np.zeros((n, n))
        for (i, j), v in zip(keys, vals):
            M[i, j] = v
            M[j, i] = -v
        return M

    def with_settings(self, settings):
        return PoissonStructure(self.chart, self._upper, self.provenance, settings, check=True)

    def __repr__(self):
        body = ", ".join(f"{{{self.chart.coords[i]},{self.chart.coords[j]}}}={e}"
                         for (i, j), e in sorted(self._upper.items()))
        return f"PoissonStructure[{self.provenance}]({body})"


def _coords_of(chart, point):
    if isinstance(point, dict):
        return tuple(float(point[c]) for c in chart.coords)
    return tuple(float(v) for v in point)


# constructors ----------------------------------------------------------------

def canonical(n_pairs, coords=None, settings=None):
    """Canonical structure on (q^1..q^n, p_1..p_n)."""
    if n_pairs < 1:
        raise DimensionError("canonical structure needs at least one pair")
    if coords is None:
        if n_pairs == 1:
            coords = ("q", "p")
        else:
            coords = tuple(f"q{a}" for a in range(1, n_pairs + 1)) + \
                tuple(f"p{a}" for a in range(1, n_pairs + 1))
    chart = Chart(coords, name="canonical")
    entries = {(a, a + n_pairs): Rational(1) for a in range(n_pairs)}
    return PoissonStructure(chart, entries, "canonical", settings)


def levi_civita(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2


def so3_constants():
    return [[[Fraction(levi_civita(i, j, k)) for k in range(3)] for j in range(3)] for i in range(3)]


def check_structure_constants(c):
    """Exact antisymmetry and Jacobi check for c[i][j][k] = c^{ij}_k."""
    n = len(c)
    c = [[[Fraction(x) for x in row] for row in plane] for plane in c]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if c[i][j][k] != -c[j][i][k]:
                    raise StructureConstantError(
                        f"structure constants not antisymmetric: c^{{{i+1}{j+1}}}_{k+1}={c[i][j][k]} "
                        f"but c^{{{j+1}{i+1}}}_{k+1}={c[j][i][k]} (triple ({i+1},{j+1},{k+1}))")
    for i, j, k in combinations(range(n), 3):
        for m in range(n):
            s = sum(c[i][j][l] * c[l][k][m] + c[j][k][l] * c[l][i][m] + c[k][i][l] * c[l][j][m]
                    for l in range(n))
            if s != 0:
                raise StructureConstantError(
                    f"structure constants violate the Jacobi identity at triple ({i+1},{j+1},{k+1}), "
                    f"component {m+1}")
    return c


def lie_poisson(c, coords=None, settings=None):
    """Lie-Poisson structure omega^{ij} = c^{ij}_k z^k."""
    c = check_structure_constants(c)
    n = len(c)
    coords = tuple(coords) if coords is not None else tuple(f"z{i}" for i in range(1, n + 1))
    chart = Chart(coords, name="lie_poisson")
    zs = chart.symbols
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            terms = [Mul((Rational(c[i][j][k]), zs[k])) for k in range(n) if c[i][j][k]]
            if terms:
                entries[(i, j)] = normalize(terms[0] if len(terms) == 1 else Add(terms))
    return PoissonStructure(chart, entries, "lie_poisson", settings)


def so3(coords=None, settings=None):
    return lie_poisson(so3_constants(), coords, settings)


# operations ------------------------------------------------------------------

def _bracket_raw(P, a, b):
    coords = P.chart.coords
    ga = [differentiate(a, c) for c in coords]
    gb = [differentiate(b, c) for c in coords]
    terms = []
    for (i, j), w in P._upper.items():
        if ga[i] != ZERO and gb[j] != ZERO:
            terms.append(Mul((ga[i], w, gb[j])))
        if ga[j] != ZERO and gb[i] != ZERO:
            terms.append(Mul((Rational(-1), ga[j], w, gb[i])))
    if not terms:
        return ZERO
    return terms[0] if len(terms) == 1 else Add(terms)


def bracket(P, A, B):
    """Poisson bracket {A, B} = d_i A omega^{ij} d_j B (normalized)."""
    a = _expr_on(P.chart, A)
    b = _expr_on(P.chart, B)
    return normalize(_bracket_raw(P, a, b))


def jacobi_residual(P, settings=None):
    """J^{ijk} = omega^{ip} d_p omega^{jk} + cyclic, for i<j<k, plus aggregate verdict."""
    s = resolve(settings) if settings is not None else P.settings
    coords = P.chart.coords
    n = P.dim
    residuals = {}
    for i, j, k in combinations(range(n), 3):
        terms = []
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            wbc = P.entry(b, c)
            if wbc == ZERO:
                continue
            for p in range(n):
                wap = P.entry(a, p)
                if wap == ZERO:
                    continue
                d = differentiate(wbc, coords[p])
                if d != ZERO:
                    terms.append(Mul((wap, d)))
        r = ZERO if not terms else normalize(terms[0] if len(terms) == 1 else Add(terms))
        residuals[(i, j, k)] = r
    labels = [f"J^{{{coords[i]},{coords[j]},{coords[k]}}}" for (i, j, k) in residuals]
    verdict = is_zero_all(list(residuals.values()), s.tol, s.samples, s.seed, labels=labels)
    return JacobiReport(residuals, verdict)


def hamiltonian_field(P, H):
    """X^i = omega^{ij} d_j H."""
    h = _expr_on(P.chart, H)
    grad = [differentiate(h, c) for c in P.chart.coords]
    comps = []
    for i in range(P.dim):
        terms = [Mul((P.entry(i, j), grad[j])) for j in range(P.dim)
                 if grad[j] != ZERO and P.entry(i, j) != ZERO]
        comps.append(normalize(Add(terms)) if len(terms) > 1 else (normalize(terms[0]) if terms else ZERO))
    return VectorField(P.chart, comps)


def lie_bracket(V, U):
    """[V, U]^i = V^j d_j U^i - U^j d_j V^i."""
    if V.chart != U.chart:
        raise ChartMismatch("vector fields live on different charts")
    coords = V.chart.coords
    comps = []
    for i in range(len(coords)):
        terms = []
        for j, c in enumerate(coords):
            du = differentiate(U[i], c)
            dv = differentiate(V[i], c)
            if du != ZERO and V[j] != ZERO:
                terms.append(Mul((V[j], du)))
            if dv != ZERO and U[j] != ZERO:
                terms.append(Mul((Rational(-1), U[j], dv)))
        comps.append(ZERO if not terms else normalize(terms[0] if len(terms) == 1 else Add(terms)))
    return VectorField(V.chart, comps)


def homomorphism_check(P, A, B, settings=None):
    """Verdict on X_{A,B} + [X_A, X_B] = 0, componentwise."""
    s = resolve(settings) if settings is not None else P.settings
    XAB = hamiltonian_field(P, bracket(P, A, B))
    L = lie_bracket(hamiltonian_field(P, A), hamiltonian_field(P, B))
    diffs = [normalize(XAB[i] + L[i]) for i in range(P.dim)]
    labels = [f"component {c}" for c in P.chart.coords]
    return is_zero_all(diffs, s.tol, s.samples, s.seed, labels=labels)


def casimir_check(P, K, settings=None):
    """Verdict on omega^{ij} d_j K = 0 for every i."""
    s = resolve(settings) if settings is not None else P.settings
    X = hamiltonian_field(P, K)
    labels = [f"{{{c},K}}" for c in P.chart.coords]
    return is_zero_all(list(X.components), s.tol, s.samples, s.seed, labels=labels)


class CoordinateMap:
    """Invertible change of coordinates, both directions supplied by the user.

    ``forward`` gives the target coordinates as functions of the source ones,
    ``inverse`` the source coordinates as functions of the target ones.
    """

    def __init__(self, source, target, forward, inverse, settings=None, tol=1e-8):
        if len(forward) != target.dim or len(inverse) != source.dim:
            raise DimensionError("coordinate map component counts do not match the charts")
        self.source = source
        self.target = target
        self.forward = tuple(source.expr(e) for e in forward)
        self.inverse = tuple(target.expr(e) for e in inverse)
        s = resolve(settings)
        composed = [substitute(f, dict(zip(source.coords, self.inverse))) for f in self.forward]
        diffs = [normalize(c - Symbol(t)) for c, t in zip(composed, target.coords)]
        verdict = is_zero_all(diffs, tol, s.samples, s.seed,
                              labels=[f"forward(inverse)-{t}" for t in target.coords])
        if not verdict.is_zero:
            raise VerificationError("coordinate map forward and inverse are not mutually inverse", verdict)
        self.verdict = verdict


def identity_map(chart):
    return CoordinateMap(chart, chart, chart.symbols, chart.symbols)


def change_coordinates(P, M, settings=None):
    """omega'^{ab} = (d z'^a/d z^i)(d z'^b/d z^j) omega^{ij}, evaluated at z(z')."""
    if M.source != P.chart:
        raise ChartMismatch("coordinate map source does not match the structure chart")
    src = P.chart.coords
    n = P.dim
    J = [[differentiate(f, c) for c in src] for f in M.forward]
    back = dict(zip(src, M.inverse))
    entries = {}
    for a in range(n):
        for b in range(a + 1, n):
            terms = []
            for (i, j), w in P._upper.items():
                if J[a][i] != ZERO and J[b][j] != ZERO:
                    terms.append(Mul((J[a][i], J[b][j], w)))
                if J[a][j] != ZERO and J[b][i] != ZERO:
                    terms.append(Mul((Rational(-1), J[a][j], J[b][i], w)))
            if terms:
                raw = terms[0] if len(terms) == 1 else Add(terms)
                entries[(a, b)] = substitute(raw, back)
    return PoissonStructure(M.target, entries, P.provenance,
                            settings if settings is not None else P.settings)


def pullback_function(A, target_coords, phi):
    """phi^*(A): substitute target coordinates by the map components."""
    return substitute(A, dict(zip(target_coords, phi)))


def poisson_map_check(P_source, P_target, phi, tests=None, settings=None):
    """Verdict on {phi*A, phi*B}_source - phi*({A,B}_target) over test pairs.

    ``tests`` defaults to every pair of target coordinates.
    """
    s = resolve(settings) if settings is not None else P_source.settings
    phi = [P_source.chart.expr(e) for e in phi]
    if len(phi) != P_target.dim:
        raise DimensionError(f"map has {len(phi)} components, target dimension is {P_target.dim}")
    tc = P_target.chart.coords
    if tests is None:
        tests = [(Symbol(tc[i]), Symbol(tc[j])) for i, j in combinations(range(len(tc)), 2)]
    diffs, labels = [], []
    for A, B in tests:
        a = _expr_on(P_target.chart, A)
        b = _expr_on(P_target.chart, B)
        lhs = bracket(P_source, pullback_function(a, tc, phi), pullback_function(b, tc, phi))
        rhs = pullback_function(bracket(P_target, a, b), tc, phi)
        diffs.append(normalize(lhs - rhs))
        labels.append(f"{{{a},{b}}}")
    return is_zero_all(diffs, s.tol, s.samples, s.seed, labels=labels)


def gradient_matrix(funcs, coords):
    return [[differentiate(f, c) for c in coords] for f in funcs]


def functional_rank(funcs, chart, points=None, settings=None):
    """Generic (largest) numeric rank of the gradient matrix over sample points."""
    s = resolve(settings)
    funcs = [chart.expr(f) for f in funcs]
    if not funcs:
        return 0
    G = gradient_matrix(funcs, chart.coords)
    flat = tuple(e for r in G for e in r)
    if points is None:
        points = box_points(chart.coords, s.rank_points, s.seed, exprs=flat)
    fn = compile_exprs(flat, chart.coords)
    m, n = len(funcs), chart.dim
    ranks = []
    for p in points[: s.rank_points]:
        vals = np.array(fn(*_coords_of(chart, p))).reshape(m, n)
        ranks.append(numeric_rank(vals, s.rank_threshold))
    return max(ranks)


def functionally_independent(funcs, chart, points=None, settings=None):
    return functional_rank(funcs, chart, points, settings) == len(funcs)
