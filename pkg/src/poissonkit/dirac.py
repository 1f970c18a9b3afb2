"""Second-class constraints: Delta matrix, consistency chain, Dirac bracket.

Conventions: Delta^{ab} = {Phi^a, Phi^b}, Delta~ its inverse.  The Dirac
tensor is

    omega_D^{ij} = omega^{ij} - {z^i, Phi^a} Delta~_{ab} {Phi^b, z^j}.
"""

import numpy as np

from .errors import (ChartMismatch, DegenerateDelta, InputError, OddConstraintCount,
                     SingularMatrixError, StepLimitExceeded, UndecidableError, VerificationError)
from .settings import resolve
from .structures import (PoissonStructure, ScalarField, _coords_of, _expr_on, bracket, functional_rank,
                         gradient_matrix)
from .symcore import (ZERO, Rational, RatContext, Symbol, box_points, compile_exprs,
                      differentiate, is_zero_all, normalize, substitute)
from .symcore.zero import PROVED_ZERO
from .symcore import linalg
from .symcore.linalg import numeric_rank

SYMBOLIC_LIMIT = 8
CONTRADICTION_FLOOR = 1e-6


class Parametrization:
    """Solved coordinates z^alpha = f^alpha(z^a) in terms of the kept ones."""

    def __init__(self, chart, solved, f, settings=None):
        solved = tuple(str(s) for s in solved)
        if len(set(solved)) != len(solved) or not set(solved) <= set(chart.coords):
            raise InputError(f"solved coordinates {solved} must be distinct chart coordinates")
        self.chart = chart
        self.solved = solved
        self.kept = tuple(c for c in chart.coords if c not in solved)
        if isinstance(f, dict):
            f = [f[s] for s in solved]
        if len(f) != len(solved):
            raise InputError("parametrization needs one expression per solved coordinate")
        self.f = tuple(chart.expr(e) for e in f)
        for s, e in zip(solved, self.f):
            extra = e.free_symbols - set(self.kept) - set(chart.params)
            if extra:
                raise InputError(f"f for {s} depends on solved coordinates {sorted(extra)}")
        self.settings = resolve(settings)
        self._points = None

    @property
    def mapping(self):
        return dict(zip(self.solved, self.f))

    def restrict(self, e):
        """A(f(z^a), z^a)."""
        return substitute(e, self.mapping)

    def lift_exprs(self):
        """Ambient coordinates as expressions of the kept ones, in chart order."""
        m = self.mapping
        return tuple(m[c] if c in m else Symbol(c) for c in self.chart.coords)

    def surface_points(self):
        """Seeded points: kept coordinates in [-b, b]^k lifted through f."""
        if self._points is None:
            s = self.settings
            b = s.surface_box
            if self.kept:
                kp = box_points(self.kept, s.samples, s.seed, (-b, b), exprs=self.f)
            else:
                kp = [{}]
            fn = compile_exprs(self.f, self.kept) if self.f else None
            pts = []
            for p in kp:
                vals = fn(*(p[k] for k in self.kept)) if fn else ()
                full = dict(p)
                full.update(zip(self.solved, vals))
                pts.append({c: full[c] for c in self.chart.coords})
            self._points = pts
        return self._points

    def kept_points(self):
        return [{k: p[k] for k in self.kept} for p in self.surface_points()]


def surface_zero(exprs, param, tol, labels=None):
    """Zero test on the surface: exact after substitution when possible, else sampled."""
    restricted = [param.restrict(e) for e in exprs]
    return is_zero_all(restricted, tol, points=param.kept_points(), labels=labels)


class ConstraintSet:
    """Ordered constraints Phi^a on a chart with an optional parametrization."""

    def __init__(self, chart, constraints, parametrization=None, origins=None, settings=None,
                 check=True):
        self.chart = chart
        self.exprs = tuple(chart.expr(e) for e in constraints)
        self.origins = tuple(origins) if origins is not None else ("primary",) * len(self.exprs)
        if len(self.origins) != len(self.exprs):
            raise InputError("one origin tag per constraint")
        self.settings = resolve(settings)
        if isinstance(parametrization, tuple):
            parametrization = Parametrization(chart, parametrization[0], parametrization[1], self.settings)
        self.parametrization = parametrization
        self.reports = {}
        if check and self.exprs:
            self._validate()

    def _validate(self):
        s = self.settings
        rank = functional_rank(self.exprs, self.chart, settings=s)
        if rank < len(self.exprs):
            raise InputError(f"constraints are not functionally independent (rank {rank} < {len(self.exprs)})")
        P = self.parametrization
        if P is not None:
            if P.chart != self.chart:
                raise ChartMismatch("parametrization chart mismatch")
            if len(P.solved) != len(self.exprs):
                raise InputError(f"{len(self.exprs)} constraints but {len(P.solved)} solved coordinates")
            v = surface_zero(self.exprs, P, max(s.tol, 1e-9),
                             labels=[f"Phi{a + 1}(f)" for a in range(len(self.exprs))])
            if not v.is_zero:
                raise VerificationError("parametrization does not satisfy the constraints", v)
            self.reports["parametrization"] = v
            # det dPhi/dz^alpha must not vanish on the surface
            sub = [[differentiate(e, a) for a in P.solved] for e in self.exprs]
            flat = tuple(x for r in sub for x in r)
            fn = compile_exprs(flat, self.chart.coords)
            m = len(self.exprs)
            ok = any(numeric_rank(np.array(fn(*_coords_of(self.chart, p))).reshape(m, m), s.rank_threshold) == m
                     for p in P.surface_points())
            if not ok:
                raise InputError("constraints cannot be solved for the declared coordinates "
                                 "(det dPhi/dz^alpha vanishes on the surface)")

    def __len__(self):
        return len(self.exprs)

    def __iter__(self):
        return iter(self.exprs)

    def __getitem__(self, a):
        return self.exprs[a]

    def __repr__(self):
        return f"ConstraintSet({[str(e) for e in self.exprs]})"


def _same_chart(P, C):
    if C.chart != P.chart:
        raise ChartMismatch("constraints live on a different chart")


def delta_matrix(P, C):
    """Delta^{ab} = {Phi^a, Phi^b}."""
    _same_chart(P, C)
    m = len(C)
    D = [[ZERO] * m for _ in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            v = bracket(P, C[a], C[b])
            D[a][b] = v
            D[b][a] = normalize(-v)
    return D


class SecondClassVerdict:
    def __init__(self, det, verdict, on_surface):
        self.det = det
        self.verdict = verdict
        self.on_surface = on_surface

    @property
    def second_class(self):
        return not self.verdict.is_zero

    def __repr__(self):
        return f"SecondClassVerdict(det={self.det}, second_class={self.second_class})"


def second_class_check(P, C, on_surface=False, settings=None):
    """det Delta, tested for vanishing (on the surface when requested)."""
    s = resolve(settings) if settings is not None else C.settings
    D = delta_matrix(P, C)
    det = linalg.det(D) if len(C) else Rational(1)
    if on_surface:
        if C.parametrization is None:
            raise InputError("on-surface check needs a parametrization")
        det_s = C.parametrization.restrict(det)
        v = surface_zero([det], C.parametrization, s.tol, labels=["det Delta"])
        return SecondClassVerdict(det_s, v, True)
    return SecondClassVerdict(det, is_zero_all([det], s.tol, s.samples, s.seed, labels=["det Delta"]), False)


# consistency chain ------------------------------------------------------------

class ChainStep:
    def __init__(self, step, parent, psi, outcome, evidence=None):
        self.step = step
        self.parent = parent
        self.psi = psi
        self.outcome = outcome
        self.evidence = evidence

    def to_dict(self):
        d = {"step": self.step, "parent": str(self.parent), "psi": str(self.psi), "outcome": self.outcome}
        if self.evidence is not None:
            d["evidence"] = self.evidence
        return d


class ChainResult:
    def __init__(self, status, constraints, steps, witness=None):
        self.status = status          # "terminated" | "contradiction" | "dimension_limit"
        self.constraints = constraints
        self.steps = steps
        self.witness = witness

    @property
    def contradiction(self):
        return self.status == "contradiction"

    def __repr__(self):
        return f"ChainResult({self.status}, {self.constraints})"


def consistency_chain(P, H, C, max_steps=10, settings=None):
    """Generate secondary constraints {Phi, H} until closure or contradiction.

    Each candidate Psi is classified:

    * identically zero, or zero on the surface of the original
      parametrization (while no constraint has been added) -> dropped;
    * functionally independent of the current set -> appended;
    * dependent and of magnitude above 1e-6 at every surface point ->
      contradiction; dependent and vanishing at the surface points -> dropped.

    Without surface points for the current set, a dependent non-constant
    Psi cannot be classified and raises UndecidableError.
    """
    _same_chart(P, C)
    s = resolve(settings) if settings is not None else C.settings
    h = _expr_on(P.chart, H)
    current = list(C.exprs)
    origins = list(C.origins)
    param = C.parametrization
    steps = []
    queue = list(current)
    k = 0
    while queue:
        k += 1
        if k > max_steps:
            raise StepLimitExceeded(f"consistency chain did not close within {max_steps} steps")
        surface = param if (param is not None and len(current) == len(C.exprs)) else None
        added = []
        for phi in queue:
            psi = bracket(P, phi, h)
            if psi == ZERO:
                steps.append(ChainStep(k, phi, psi, "zero", {"kind": PROVED_ZERO}))
                continue
            if isinstance(psi, Rational):
                steps.append(ChainStep(k, phi, psi, "contradiction", {"value": float(psi.value)}))
                return ChainResult("contradiction", _as_set(P, current, origins, param, C, s), steps, psi)
            if surface is not None:
                v = surface_zero([psi], surface, s.tol)
                if v.is_zero:
                    steps.append(ChainStep(k, phi, psi, "zero_on_surface", v.to_dict()))
                    continue
            pts = surface.surface_points() if surface is not None else None
            base = current + added
            r0 = functional_rank(base, P.chart, pts, s)
            r1 = functional_rank(base + [psi], P.chart, pts, s)
            if r1 > r0:
                if len(base) + 1 > P.dim:
                    steps.append(ChainStep(k, phi, psi, "dimension_limit"))
                    return ChainResult("dimension_limit", _as_set(P, current + added, origins, param, C, s), steps)
                added.append(psi)
                origins.append(f"secondary(step {k})")
                steps.append(ChainStep(k, phi, psi, "added", {"rank": r1}))
                continue
            if pts is None:
                raise UndecidableError(
                    f"{psi} depends on the current constraints; deciding whether it vanishes on the "
                    "surface needs a parametrization of that surface")
            fn = compile_exprs((psi,), P.chart.coords)
            vals = [abs(fn(*_coords_of(P.chart, p))[0]) for p in pts]
            if min(vals) > CONTRADICTION_FLOOR:
                steps.append(ChainStep(k, phi, psi, "contradiction", {"min_abs_on_surface": min(vals)}))
                return ChainResult("contradiction", _as_set(P, current, origins, param, C, s), steps, psi)
            if max(vals) <= s.tol:
                steps.append(ChainStep(k, phi, psi, "zero_on_surface", {"max_abs": max(vals)}))
                continue
            raise UndecidableError(f"{psi} is dependent on the constraints but neither vanishes nor "
                                   "stays away from zero on the surface")
        current.extend(added)
        queue = added
    return ChainResult("terminated", _as_set(P, current, origins, param, C, s), steps)


def _as_set(P, exprs, origins, param, C, s):
    keep = param if len(exprs) == len(C.exprs) else None
    return ConstraintSet(P.chart, exprs, keep, origins[: len(exprs)], s, check=False)


# Dirac bracket -------------------------------------------------------------------

class DiracResult:
    def __init__(self, structure, delta, delta_inv, det, B, report, multipliers=None):
        self.structure = structure
        self.delta = delta
        self.delta_inv = delta_inv
        self.det = det
        self.B = B
        self.report = report
        self.multipliers = multipliers

    @property
    def passed(self):
        return all(v.is_zero for v in self.report.values())


def constraint_gradients_brackets(P, C):
    """B[i][a] = {z^i, Phi^a} = omega^{ij} d_j Phi^a."""
    coords = P.chart.coords
    n, m = P.dim, len(C)
    G = gradient_matrix(C.exprs, coords)
    B = [[ZERO] * m for _ in range(n)]
    for i in range(n):
        for a in range(m):
            B[i][a] = bracket(P, Symbol(coords[i]), C[a])
    return B, G


def _delta_inverse(P, C):
    m = len(C)
    if m % 2:
        raise OddConstraintCount(f"second-class sets have an even number of constraints, got {m}")
    if m > SYMBOLIC_LIMIT:
        raise DegenerateDelta(f"symbolic Delta inversion is limited to {SYMBOLIC_LIMIT} constraints; "
                              "use dirac_at for pointwise evaluation")
    D = delta_matrix(P, C)
    det, Dinv = linalg.det_and_inverse(D)
    if Dinv is None:
        raise DegenerateDelta(f"Delta is singular (det Delta = {det})", det)
    return D, Dinv, det


def dirac_bracket(P, C, settings=None):
    """Dirac tensor with Casimir and Jacobi verification."""
    _same_chart(P, C)
    s = resolve(settings) if settings is not None else P.settings
    D, Dinv, det = _delta_inverse(P, C)
    B, _ = constraint_gradients_brackets(P, C)
    n, m = P.dim, len(C)
    ctx = RatContext([P.entry(i, j) for i in range(n) for j in range(n)]
                     + [x for r in B for x in r] + [x for r in Dinv for x in r])
    Be = [[ctx.to_el(x) for x in r] for r in B]
    De = [[ctx.to_el(x) for x in r] for r in Dinv]
    # T[i][b] = sum_a B[i][a] Dinv[a][b]
    T = [[sum((Be[i][a] * De[a][b] for a in range(m) if Be[i][a] and De[a][b]), ctx.K.zero)
          for b in range(m)] for i in range(n)]
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            acc = ctx.to_el(P.entry(i, j))
            for b in range(m):
                if T[i][b] and Be[j][b]:
                    acc = acc + T[i][b] * Be[j][b]
            e = ctx.to_expr(acc)
            if e != ZERO:
                entries[(i, j)] = e
    PD = PoissonStructure(P.chart, entries, "dirac", s, check=False)
    cas = []
    labels = []
    for i, c in enumerate(P.chart.coords):
        for a in range(m):
            cas.append(bracket(PD, Symbol(c), C[a]))
            labels.append(f"{{{c},Phi{a + 1}}}_D")
    report = {
        "casimir": is_zero_all(cas, s.tol, s.samples, s.seed, labels=labels),
        "jacobi": PD.jacobi().verdict,
    }
    if not report["jacobi"].is_zero:
        raise VerificationError("Dirac tensor fails the Jacobi identity", report["jacobi"])
    return DiracResult(PD, D, Dinv, det, B, report)


def dirac_at(P, C, point):
    """Numeric Dirac tensor at a point (any constraint count)."""
    coords = P.chart.coords
    W = P.numeric(point)
    G = gradient_matrix(C.exprs, coords)
    flat = tuple(x for r in G for x in r)
    g = np.array(compile_exprs(flat, coords)(*_coords_of(P.chart, point))).reshape(len(C), len(coords))
    Bn = W @ g.T
    Dn = g @ W @ g.T
    try:
        X = linalg.solve(Dn, Bn.T) if len(C) else np.zeros((0, len(coords)))
    except SingularMatrixError:
        raise DegenerateDelta("Delta is singular at this point") from None
    return W + Bn @ X


# derived functions ------------------------------------------------------------------

def _contract(P, C, Dinv, left, right):
    """sum_ab left[a] Dinv[a][b] right[b] as a normalized expression."""
    m = len(C)
    ctx = RatContext(list(left) + list(right) + [x for r in Dinv for x in r])
    acc = ctx.K.zero
    for a in range(m):
        la = ctx.to_el(left[a])
        if not la:
            continue
        for b in range(m):
            if Dinv[a][b] != ZERO and right[b] != ZERO:
                acc = acc + la * ctx.to_el(Dinv[a][b]) * ctx.to_el(right[b])
    return ctx.to_expr(acc)


def deformed_function(P, C, A, tests=None, settings=None):
    """A_d = A - {A, Phi^a} Delta~_{ab} Phi^b.

    When a parametrization is present, {A,B}_D - {A_d,B_d} is checked at
    surface points for each test function B (default: every coordinate).
    """
    s = resolve(settings) if settings is not None else C.settings
    _same_chart(P, C)
    a = _expr_on(P.chart, A)
    _, Dinv, _ = _delta_inverse(P, C)
    left = [bracket(P, a, phi) for phi in C]
    Ad = normalize(a - _contract(P, C, Dinv, left, list(C.exprs)))
    out = ScalarField(P.chart, Ad)
    out.verdict = None
    if C.parametrization is not None:
        PD = dirac_bracket(P, C, s).structure
        tests = [Symbol(c) for c in P.chart.coords] if tests is None else [_expr_on(P.chart, t) for t in tests]
        diffs = []
        for b in tests:
            lb = [bracket(P, b, phi) for phi in C]
            Bd = normalize(b - _contract(P, C, Dinv, lb, list(C.exprs)))
            diffs.append(normalize(bracket(PD, a, b) - bracket(P, Ad, Bd)))
        out.verdict = surface_zero(diffs, C.parametrization, max(s.tol, 1e-9),
                                   labels=[f"{{A,{t}}}_D-{{A_d,{t}_d}}" for t in tests])
    return out


class Multipliers(list):
    """lambda^b as expressions, with the residual verdict attached."""
    verdict = None


def multipliers(P, H0, C, settings=None):
    """lambda^b = -Delta~^{ba} {Phi_a, H0}, verified against {Phi_a,H0} + Delta_ab lambda^b = 0."""
    s = resolve(settings) if settings is not None else C.settings
    _same_chart(P, C)
    h = _expr_on(P.chart, H0)
    D, Dinv, _ = _delta_inverse(P, C)
    m = len(C)
    r = [bracket(P, phi, h) for phi in C]
    ctx = RatContext(r + [x for row in Dinv for x in row] + [x for row in D for x in row])
    re = [ctx.to_el(x) for x in r]
    lam_el = []
    for b in range(m):
        acc = ctx.K.zero
        for a in range(m):
            if Dinv[b][a] != ZERO and re[a]:
                acc = acc - ctx.to_el(Dinv[b][a]) * re[a]
        lam_el.append(acc)
    res = []
    for a in range(m):
        acc = re[a]
        for b in range(m):
            if D[a][b] != ZERO:
                acc = acc + ctx.to_el(D[a][b]) * lam_el[b]
        res.append(ctx.to_expr(acc))
    lam = Multipliers(ctx.to_expr(x) for x in lam_el)
    lam.verdict = is_zero_all(res, s.tol, s.samples, s.seed,
                              labels=[f"{{Phi{a + 1},H0}}+Delta lambda" for a in range(m)])
    if not lam.verdict.is_zero:
        raise VerificationError("multiplier equations not satisfied", lam.verdict)
    return lam


def total_hamiltonian(P, H, C, settings=None):
    """H~ = H - Phi^a Delta~_{ab} {Phi^b, H}; on-surface field check when parametrized."""
    s = resolve(settings) if settings is not None else C.settings
    _same_chart(P, C)
    h = _expr_on(P.chart, H)
    _, Dinv, _ = _delta_inverse(P, C)
    right = [bracket(P, phi, h) for phi in C]
    Ht = normalize(h - _contract(P, C, Dinv, list(C.exprs), right))
    out = ScalarField(P.chart, Ht)
    out.verdict = None
    if C.parametrization is not None:
        PD = dirac_bracket(P, C, s).structure
        diffs = [normalize(bracket(P, Symbol(c), Ht) - bracket(PD, Symbol(c), h)) for c in P.chart.coords]
        out.verdict = surface_zero(diffs, C.parametrization, max(s.tol, 1e-9),
                                   labels=[f"{{{c},H~}}-{{{c},H}}_D" for c in P.chart.coords])
    return out
