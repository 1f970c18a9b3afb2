"""Symplectic side: inversion, potentials, generators, pullbacks, block inverses."""

from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import (ChartMismatch, DegenerateStructure, DimensionError, DimensionTooLarge,
                     NonPolynomialEntry, NotClosed, NotHamiltonian, SingularMatrixError,
                     VerificationError)
from .settings import resolve
from .structures import PoissonStructure, ScalarField, hamiltonian_field, _coords_of
from .symcore import (ZERO, Add, Mul, Rational, Symbol, RatContext, box_points, compile_exprs,
                      differentiate, is_zero_all, normalize, substitute)
from .symcore import linalg
from .symcore.linalg import numeric_rank

SYMBOLIC_LIMIT = 8


class SymplecticForm:
    """Antisymmetric covariant tensor omega~_{ij}, stored upper-triangular."""

    def __init__(self, chart, entries, settings=None, points=None):
        n = chart.dim
        upper = {}
        if isinstance(entries, dict):
            items = entries.items()
        else:
            items = (((i, j), entries[i][j]) for i in range(n) for j in range(i + 1, n))
        for (i, j), e in items:
            if not (0 <= i < j < n):
                raise DimensionError(f"entry ({i}, {j}) is not strictly upper triangular")
            e = chart.expr(e)
            if e != ZERO:
                upper[(i, j)] = e
        self.chart = chart
        self._upper = upper
        self.settings = resolve(settings)
        self.closedness = closedness_residual(self, points=points)

    @property
    def dim(self):
        return self.chart.dim

    def entry(self, i, j):
        if i == j:
            return ZERO
        if i < j:
            return self._upper.get((i, j), ZERO)
        e = self._upper.get((j, i))
        return ZERO if e is None else normalize(-e)

    def matrix(self):
        return [[self.entry(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def numeric(self, point):
        n = self.dim
        keys = sorted(self._upper)
        M = np.zeros((n, n))
        if keys:
            vals = compile_exprs(tuple(self._upper[k] for k in keys), self.chart.coords)(
                *_coords_of(self.chart, point))
            for (i, j), v in zip(keys, vals):
                M[i, j], M[j, i] = v, -v
        return M

    @property
    def closed(self):
        return self.closedness[1].is_zero

    def __repr__(self):
        body = ", ".join(f"w[{self.chart.coords[i]},{self.chart.coords[j]}]={e}"
                         for (i, j), e in sorted(self._upper.items()))
        return f"SymplecticForm({body})"


def closedness_residual(F, settings=None, points=None):
    """d_i w_{jk} + d_j w_{ki} + d_k w_{ij} for i<j<k, plus verdict."""
    s = resolve(settings) if settings is not None else F.settings
    c = F.chart.coords
    res = {}
    for i, j, k in combinations(range(F.dim), 3):
        raw = Add((differentiate(F.entry(j, k), c[i]), differentiate(F.entry(k, i), c[j]),
                   differentiate(F.entry(i, j), c[k])))
        res[(i, j, k)] = normalize(raw)
    labels = [f"dw[{c[i]},{c[j]},{c[k]}]" for i, j, k in res]
    return res, is_zero_all(list(res.values()), s.tol, s.samples, s.seed, points=points, labels=labels)


def invert(P, settings=None):
    """omega~ = omega^{-1} as rational expressions."""
    s = resolve(settings) if settings is not None else P.settings
    if P.dim > SYMBOLIC_LIMIT:
        raise DimensionTooLarge(f"symbolic inversion is limited to n <= {SYMBOLIC_LIMIT}; "
                                "use invert_at for per-point numeric inversion")
    det, inv = linalg.det_and_inverse(P.matrix())
    if inv is None:
        raise DegenerateStructure(f"det omega vanishes identically (det = {det})")
    check = linalg.matmul(inv, P.matrix())
    diffs = [normalize(check[i][j] - (1 if i == j else 0)) for i in range(P.dim) for j in range(P.dim)]
    verdict = is_zero_all(diffs, s.tol, s.samples, s.seed)
    if not verdict.is_zero:
        raise VerificationError("inverse check failed", verdict)
    F = SymplecticForm(P.chart, inv, s)
    F.inverse_check = verdict
    F.det = det
    return F


def invert_symplectic(F, settings=None):
    """Poisson tensor omega = omega~^{-1} from a symplectic form."""
    s = resolve(settings) if settings is not None else F.settings
    if F.dim > SYMBOLIC_LIMIT:
        raise DimensionTooLarge(f"symbolic inversion is limited to n <= {SYMBOLIC_LIMIT}")
    det, inv = linalg.det_and_inverse(F.matrix())
    if inv is None:
        raise DegenerateStructure(f"form is degenerate (det = {det})")
    return PoissonStructure(F.chart, inv, "explicit", s)


def invert_at(P, point):
    """Numeric inverse of omega at a point."""
    M = P.numeric(point)
    if abs(np.linalg.det(M)) <= 1e-10:
        raise SingularMatrixError("omega is singular at this point")
    return linalg.numeric_inverse(M)


# polynomial integration --------------------------------------------------------

def _monomials(e, coords):
    """Decompose a polynomial in ``coords`` into {exponent tuple: Fraction}."""
    e = normalize(e)
    if e == ZERO:
        return {}
    ctx = RatContext((e,))
    if any(not isinstance(g, Symbol) or g.name not in coords for g in ctx.gens):
        raise NonPolynomialEntry(f"{e} is not a polynomial in {', '.join(coords)}")
    terms = ctx.poly_terms(ctx.to_el(e))
    if terms is None:
        raise NonPolynomialEntry(f"{e} is not a polynomial in {', '.join(coords)}")
    pos = [coords.index(g.name) for g in ctx.gens]
    out = {}
    for mon, c in terms.items():
        full = [0] * len(coords)
        for p, k in zip(pos, mon):
            full[p] = k
        out[tuple(full)] = c
    return out


def _from_monomials(mons, coords):
    terms = []
    for mon, c in mons.items():
        if c == 0:
            continue
        f = [Rational(c)] + [Symbol(coords[i]) ** k for i, k in enumerate(mon) if k]
        terms.append(Mul(f) if len(f) > 1 else f[0])
    if not terms:
        return ZERO
    return normalize(terms[0] if len(terms) == 1 else Add(terms))


def _scale_by_degree(e, coords, shift):
    mons = _monomials(e, coords)
    return _from_monomials({m: c / (sum(m) + shift) for m, c in mons.items()}, coords)


def antiderivative(e, coords, var):
    """Term-by-term antiderivative of a polynomial in ``var`` (constant zero)."""
    mons = _monomials(e, coords)
    k = coords.index(var)
    out = {}
    for m, c in mons.items():
        m2 = list(m)
        m2[k] += 1
        out[tuple(m2)] = out.get(tuple(m2), 0) + c / m2[k]
    return _from_monomials(out, coords)


def curl(a, coords):
    """(d_i a_j - d_j a_i) for i<j."""
    n = len(coords)
    return {(i, j): normalize(differentiate(a[j], coords[i]) - differentiate(a[i], coords[j]))
            for i in range(n) for j in range(i + 1, n)}


class Potential:
    def __init__(self, components, verdict, method):
        self.components = tuple(components)
        self.verdict = verdict
        self.method = method

    def __getitem__(self, i):
        return self.components[i]

    def __repr__(self):
        return f"Potential({[str(c) for c in self.components]}, {self.method})"


def potential(F, method="homotopy", settings=None):
    """Covariant field a_i with d_i a_j - d_j a_i = omega~_{ij}.

    ``homotopy`` (default): a_j = sum_i z^i omega~_{ij} with every degree-d
    monomial of the contraction divided by d+1 (radial homotopy).
    ``averaged``: a_i = -1/(n-1) sum_j int omega~_{ij} dz^j; the curl check
    is recorded in the returned verdict rather than enforced, because this
    averaging is not a potential in general.
    """
    s = resolve(settings) if settings is not None else F.settings
    coords = F.chart.coords
    n = F.dim
    for (i, j), e in F._upper.items():
        _monomials(e, coords)
    if not F.closed:
        raise NotClosed("symplectic form is not closed", F.closedness[1])
    if method == "homotopy":
        a = []
        for j in range(n):
            raw = [Mul((Symbol(coords[i]), F.entry(i, j))) for i in range(n) if F.entry(i, j) != ZERO]
            contraction = ZERO if not raw else normalize(Add(raw) if len(raw) > 1 else raw[0])
            a.append(_scale_by_degree(contraction, coords, 1) if contraction != ZERO else ZERO)
    elif method == "averaged":
        if n < 2:
            raise DimensionError("averaged potential needs n >= 2")
        a = []
        for i in range(n):
            acc = ZERO
            for j in range(n):
                if F.entry(i, j) != ZERO:
                    acc = acc + antiderivative(F.entry(i, j), coords, coords[j])
            a.append(normalize(Mul((Rational(Fraction(-1, n - 1)), acc))))
    else:
        raise ValueError(f"unknown method {method!r}")
    c = curl(a, coords)
    diffs = [normalize(c[(i, j)] - F.entry(i, j)) for i in range(n) for j in range(i + 1, n)]
    labels = [f"curl[{coords[i]},{coords[j]}]" for i in range(n) for j in range(i + 1, n)]
    verdict = is_zero_all(diffs, s.tol, s.samples, s.seed, labels=labels)
    if method == "homotopy" and not verdict.is_zero:
        raise VerificationError("potential failed its curl check", verdict)
    return Potential(a, verdict, method)


def generator(P, V, method="homotopy", settings=None):
    """Function A whose Hamiltonian field is V, when one exists.

    U_i = omega~_{ij} V^j must be curl-free; then A is its polynomial
    primitive.  ``homotopy`` divides each degree-d monomial of z^j U_j by
    d; ``averaged`` uses (1/n) sum_j int U_j dz^j and only reports the
    resulting check.
    """
    s = resolve(settings) if settings is not None else P.settings
    if V.chart != P.chart:
        raise ChartMismatch("vector field and structure live on different charts")
    W = invert(P, s)
    coords = P.chart.coords
    n = P.dim
    U = []
    for i in range(n):
        raw = [Mul((W.entry(i, j), V[j])) for j in range(n) if W.entry(i, j) != ZERO and V[j] != ZERO]
        U.append(ZERO if not raw else normalize(Add(raw) if len(raw) > 1 else raw[0]))
    for i in range(n):
        for j in range(i + 1, n):
            c = normalize(differentiate(U[j], coords[i]) - differentiate(U[i], coords[j]))
            v = is_zero_all([c], s.tol, s.samples, s.seed)
            if not v.is_zero:
                raise NotHamiltonian(f"field is not Hamiltonian: d_{coords[i]} U_{coords[j]} - "
                                     f"d_{coords[j]} U_{coords[i]} = {c}", v)
    if method == "homotopy":
        raw = [Mul((Symbol(coords[j]), U[j])) for j in range(n) if U[j] != ZERO]
        contraction = ZERO if not raw else normalize(Add(raw) if len(raw) > 1 else raw[0])
        A = _scale_by_degree(contraction, coords, 0) if contraction != ZERO else ZERO
    elif method == "averaged":
        acc = ZERO
        for j in range(n):
            if U[j] != ZERO:
                acc = acc + antiderivative(U[j], coords, coords[j])
        A = normalize(Mul((Rational(Fraction(1, n)), acc)))
    else:
        raise ValueError(f"unknown method {method!r}")
    X = hamiltonian_field(P, A)
    verdict = is_zero_all([normalize(X[i] - V[i]) for i in range(n)], s.tol, s.samples, s.seed,
                          labels=[f"X_A-V [{c}]" for c in coords])
    if method == "homotopy" and not verdict.is_zero:
        raise VerificationError("reconstructed generator does not reproduce the field", verdict)
    out = ScalarField(P.chart, A)
    out.verdict = verdict
    return out


# embeddings and pullback ----------------------------------------------------------

class Embedding:
    """Submanifold given by ambient coordinates as functions z^i(x^a)."""

    def __init__(self, sub_chart, ambient_chart, exprs, settings=None):
        exprs = [sub_chart.expr(e) for e in exprs]
        if len(exprs) != ambient_chart.dim:
            raise DimensionError(f"embedding needs {ambient_chart.dim} components")
        self.sub = sub_chart
        self.ambient = ambient_chart
        self.exprs = tuple(exprs)
        s = resolve(settings)
        self.settings = s
        self.jacobian = [[differentiate(e, x) for x in sub_chart.coords] for e in exprs]
        flat = tuple(e for r in self.jacobian for e in r)
        self.points = box_points(sub_chart.coords, s.samples, s.seed,
                                 (-s.surface_box, s.surface_box), exprs=tuple(exprs) + flat)
        fn = compile_exprs(flat, sub_chart.coords)
        k = sub_chart.dim
        rank = max(numeric_rank(np.array(fn(*_coords_of(sub_chart, p))).reshape(len(exprs), k),
                                s.rank_threshold) for p in self.points[: s.rank_points])
        if rank < k:
            raise DimensionError(f"embedding Jacobian has rank {rank} < {k}")

    def lift(self, point):
        return compile_exprs(self.exprs, self.sub.coords)(*_coords_of(self.sub, point))


def pullback(F, E, settings=None):
    """omega~_f,ab = (dz^i/dx^a)(dz^j/dx^b) omega~_ij(z(x))."""
    if E.ambient != F.chart:
        raise ChartMismatch("embedding ambient chart does not match the form chart")
    s = resolve(settings) if settings is not None else F.settings
    k = E.sub.dim
    back = dict(zip(F.chart.coords, E.exprs))
    Wz = {key: substitute(e, back) for key, e in F._upper.items()}
    J = E.jacobian
    entries = {}
    for a in range(k):
        for b in range(a + 1, k):
            terms = []
            for (i, j), w in Wz.items():
                if J[i][a] != ZERO and J[j][b] != ZERO:
                    terms.append(Mul((J[i][a], J[j][b], w)))
                if J[j][a] != ZERO and J[i][b] != ZERO:
                    terms.append(Mul((Rational(-1), J[j][a], J[i][b], w)))
            if terms:
                entries[(a, b)] = normalize(terms[0] if len(terms) == 1 else Add(terms))
    return SymplecticForm(E.sub, entries, s, points=E.points)


# partitioned inverse ------------------------------------------------------------

class PartitionReport:
    def __init__(self, **kw):
        self.__dict__.update(kw)

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if not isinstance(v, np.ndarray)}


def partitioned_inverse(A, k, tol=1e-10, sing_tol=1e-10):
    """Blocks of A^{-1} for antisymmetric A = [[a, b], [-b^T, c]] with a of size k.

    Checks gamma^{-1} = c + b^T a^{-1} b and a^{-1} = alpha + beta gamma^{-1} beta^T
    whenever a and gamma are invertible.  The block a is invertible exactly
    when gamma is.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not (0 < k < n):
        raise DimensionError("need a square matrix and 0 < k < n")
    if not np.allclose(A, -A.T, atol=1e-12):
        raise DimensionError("matrix is not antisymmetric")
    if numeric_rank(A, sing_tol) < n:
        raise SingularMatrixError("matrix is singular")
    Ainv = linalg.numeric_inverse(A)
    a, b, c = A[:k, :k], A[:k, k:], A[k:, k:]
    alpha, beta, gamma = Ainv[:k, :k], Ainv[:k, k:], Ainv[k:, k:]
    a_inv_ok = numeric_rank(a, sing_tol) == k
    g_inv_ok = numeric_rank(gamma, sing_tol) == n - k
    r1 = r2 = None
    if a_inv_ok and g_inv_ok:
        a_inv = linalg.numeric_inverse(a)
        g_inv = linalg.numeric_inverse(gamma)
        r1 = float(np.max(np.abs(g_inv - (c + b.T @ a_inv @ b))))
        r2 = float(np.max(np.abs(a_inv - (alpha + beta @ g_inv @ beta.T))))
    passed = (a_inv_ok == g_inv_ok) and (r1 is None or (r1 <= tol and r2 <= tol))
    return PartitionReport(inverse=Ainv, alpha=alpha, beta=beta, gamma=gamma,
                           a_invertible=a_inv_ok, gamma_invertible=g_inv_ok,
                           gamma_identity_residual=r1, a_identity_residual=r2, passed=passed)
