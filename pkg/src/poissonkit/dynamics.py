"""Fixed-step integration of Hamiltonian flows, series solutions and flow maps."""

import io
import math
from math import factorial

import numpy as np

from .dirac import SYMBOLIC_LIMIT as DELTA_LIMIT, dirac_bracket, dirac_at
from .errors import (DegenerateDelta, DomainError, InputError, NumericAbort, OffSurfaceError,
                     SingularMatrixError)
from .structures import _expr_on, bracket, hamiltonian_field, lie_bracket
from .symcore import ZERO, Func, Symbol, compile_exprs, normalize, walk
from .symcore.linalg import solve

MAX_SERIES_ORDER = 12
SURFACE_TOL = 1e-10


class Trajectory:
    """Uniformly sampled integral line with per-step monitor values."""

    def __init__(self, coords, times, states, monitors, metadata):
        self.coords = tuple(coords)
        self.times = np.asarray(times)
        self.states = np.asarray(states)
        self.monitors = monitors
        self.metadata = metadata

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]

    def drift(self, name):
        """max |m(tau) - m(0)| for a monitor."""
        m = self.monitors[name]
        return float(np.max(np.abs(m - m[0])))

    def max_abs(self, name):
        return float(np.max(np.abs(self.monitors[name])))

    def header(self):
        return ["tau", *self.coords, *self.monitors.keys()]

    def to_csv(self, stream=None):
        """CSV text; floats in 17 significant digits."""
        out = io.StringIO() if stream is None else stream
        out.write(",".join(self.header()) + "\n")
        cols = [self.times] + [self.states[:, i] for i in range(self.states.shape[1])] + \
            list(self.monitors.values())
        for row in zip(*cols):
            out.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        return out.getvalue() if stream is None else None


def _rk4(f, z0, h, n_steps, t0=0.0, on_step=None):
    z = np.array(z0, dtype=float)
    states = np.empty((n_steps + 1, len(z)))
    states[0] = z
    t = t0
    for k in range(n_steps):
        try:
            k1 = f(z)
            k2 = f(z + 0.5 * h * k1)
            k3 = f(z + 0.5 * h * k2)
            k4 = f(z + h * k3)
        except DomainError as e:
            raise NumericAbort(f"evaluation failed at tau={t:.6g}, state={z.tolist()}: {e}") from None
        except DegenerateDelta:
            raise DegenerateDelta(f"Delta singular near tau={t:.6g}, state={z.tolist()}") from None
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (k + 1) * h
        if not np.all(np.isfinite(z)):
            raise NumericAbort(f"non-finite state at tau={t:.6g}")
        states[k + 1] = z
        if on_step is not None:
            on_step(k + 1, z)
    return states


def _steps(tau_end, h):
    if h <= 0:
        raise InputError("step h must be positive")
    if tau_end < h:
        raise InputError("tau_end must be at least h")
    n = int(round(tau_end / h))
    if abs(n * h - tau_end) > 1e-9 * max(1.0, tau_end):
        raise InputError("tau_end must be an integer multiple of h")
    return n


def _field_fn(components, coords):
    fn = compile_exprs(tuple(components), tuple(coords))
    return lambda z: np.array(fn(*z))


def _monitor_block(coords, named_exprs, states):
    out = {}
    if not named_exprs:
        return out
    names = [n for n, _ in named_exprs]
    fn = compile_exprs(tuple(e for _, e in named_exprs), tuple(coords))
    vals = np.array([fn(*z) for z in states])
    for k, n in enumerate(names):
        out[n] = vals[:, k]
    return out


def _named(P, H, casimirs, constraints):
    chart = P.chart
    items = [("H", _expr_on(chart, H))]
    for b, k in enumerate(casimirs or ()):
        items.append((f"K{b + 1}", _expr_on(chart, k)))
    for a, c in enumerate(constraints or ()):
        items.append((f"Phi{a + 1}", _expr_on(chart, c)))
    return items


def integrate(P, H, z0, tau_end, h, casimirs=(), constraints=(), monitors=()):
    """Classical RK4 on dz/dtau = omega grad H.

    ``monitors`` holds extra (name, expression) pairs evaluated at every step.
    """
    X = hamiltonian_field(P, H)
    n = _steps(tau_end, h)
    states = _rk4(_field_fn(X.components, P.chart.coords), z0, h, n)
    named = _named(P, H, casimirs, constraints) + [(m, _expr_on(P.chart, e)) for m, e in monitors]
    mons = _monitor_block(P.chart.coords, named, states)
    return Trajectory(P.chart.coords, np.arange(n + 1) * h, states, mons,
                      {"integrator": "rk4", "h": h, "mode": "poisson"})


def _check_on_surface(C, z0):
    fn = compile_exprs(tuple(C.exprs), C.chart.coords)
    vals = fn(*[float(v) for v in z0])
    worst = max((abs(v) for v in vals), default=0.0)
    if worst > SURFACE_TOL:
        raise OffSurfaceError(f"initial point is off the constraint surface (max |Phi| = {worst:.3g})")


def integrate_dirac(P, H, C, z0, tau_end, h, casimirs=()):
    """RK4 on dz/dtau = omega_D grad H; constraint drift is monitored, never corrected."""
    _check_on_surface(C, z0)
    n = _steps(tau_end, h)
    coords = P.chart.coords
    if len(C) <= DELTA_LIMIT:
        D = dirac_bracket(P, C)
        X = hamiltonian_field(D.structure, H)
        f = _field_fn(X.components, coords)
        route = "symbolic"
    else:
        hexpr = _expr_on(P.chart, H)
        g = compile_exprs(tuple(normalize(_d(hexpr, c)) for c in coords), coords)

        def f(z):
            return dirac_at(P, C, z) @ np.array(g(*z))
        route = "pointwise"
    states = _rk4(f, z0, h, n)
    mons = _monitor_block(coords, _named(P, H, casimirs, C.exprs), states)
    return Trajectory(coords, np.arange(n + 1) * h, states, mons,
                      {"integrator": "rk4", "h": h, "mode": "dirac", "route": route})


def _d(e, c):
    from .symcore import differentiate
    return differentiate(e, c)


class _MultiplierField:
    """dz/dtau = {z,H0} + lambda^a {z,Phi_a}, lambda solved pointwise."""

    def __init__(self, P, H0, C):
        coords = P.chart.coords
        h = _expr_on(P.chart, H0)
        m, n = len(C), P.dim
        self.m, self.n = m, n
        xh = hamiltonian_field(P, h).components
        r = [bracket(P, phi, h) for phi in C]
        D = [bracket(P, C[a], C[b]) for a in range(m) for b in range(m)]
        B = [bracket(P, Symbol(c), phi) for c in coords for phi in C]
        self.fn = compile_exprs(tuple(xh) + tuple(r) + tuple(D) + tuple(B), coords)
        self.last_lambda = None
        self.last_residual = None

    def parts(self, z):
        v = np.array(self.fn(*z))
        n, m = self.n, self.m
        xh = v[:n]
        r = v[n:n + m]
        D = v[n + m:n + m + m * m].reshape(m, m)
        B = v[n + m + m * m:].reshape(n, m)
        return xh, r, D, B

    def lam(self, z):
        _, r, D, _ = self.parts(z)
        try:
            lam = solve(D, -r)
        except SingularMatrixError:
            raise DegenerateDelta("Delta is singular") from None
        return lam, float(np.max(np.abs(r + D @ lam))) if len(r) else 0.0

    def __call__(self, z):
        xh, r, D, B = self.parts(z)
        try:
            lam = solve(D, -r)
        except SingularMatrixError:
            raise DegenerateDelta("Delta is singular") from None
        return xh + B @ lam


def integrate_multiplier(P, H0, C, z0, tau_end, h, casimirs=()):
    """Integrate with pointwise multipliers; records lambda and its residual."""
    if len(C) % 2:
        from .errors import OddConstraintCount
        raise OddConstraintCount(f"second-class sets have an even number of constraints, got {len(C)}")
    _check_on_surface(C, z0)
    n = _steps(tau_end, h)
    coords = P.chart.coords
    F = _MultiplierField(P, H0, C)
    states = _rk4(F, z0, h, n)
    mons = _monitor_block(coords, _named(P, H0, casimirs, C.exprs), states)
    lams, res = [], []
    for z in states:
        lam, r = F.lam(z)
        lams.append(lam)
        res.append(r)
    lams = np.array(lams)
    for a in range(len(C)):
        mons[f"lambda{a + 1}"] = lams[:, a]
    return Trajectory(coords, np.arange(n + 1) * h, states, mons,
                      {"integrator": "rk4", "h": h, "mode": "multiplier",
                       "lambda_residual_max": float(max(res)) if res else 0.0})


class SeriesResult:
    def __init__(self, point, terms, transcendental):
        self.point = point
        self.terms = terms
        self.transcendental = transcendental

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.point, dtype=dtype)

    def __getitem__(self, i):
        return self.point[i]


_SERIES_CACHE = {}


def lie_series_terms(P, H, order):
    """[[L^m z^i for m in 0..order] for i], L(F) = {F, H}."""
    h = _expr_on(P.chart, H)
    key = (id(P), h, P.chart.coords)
    have = _SERIES_CACHE.get(key)
    if have is None or len(have[0]) <= order:
        terms = []
        for c in P.chart.coords:
            col = [Symbol(c)]
            for _ in range(order):
                col.append(bracket(P, col[-1], h) if col[-1] != ZERO else ZERO)
            terms.append(col)
        _SERIES_CACHE[key] = terms
        have = terms
    return [col[: order + 1] for col in have]


def series_solution(P, H, z0, tau, order):
    """sum_m tau^m/m! L^m z evaluated at z0."""
    if order < 0 or order > MAX_SERIES_ORDER:
        raise InputError(f"series order must be between 0 and {MAX_SERIES_ORDER}")
    h = _expr_on(P.chart, H)
    transcendental = any(isinstance(x, Func) for x in walk(h))
    terms = lie_series_terms(P, h, order)
    coords = P.chart.coords
    flat = tuple(t for col in terms for t in col)
    vals = np.array(compile_exprs(flat, coords)(*[float(v) for v in z0])).reshape(len(coords), order + 1)
    w = np.array([tau ** m / factorial(m) for m in range(order + 1)])
    return SeriesResult(vals @ w, terms, transcendental)


def flow_map(V, tau, h, z0):
    """RK4 flow of an arbitrary vector field for time tau (step adjusted to divide tau)."""
    if h <= 0:
        raise InputError("step h must be positive")
    z0 = np.array(z0, dtype=float)
    if tau == 0:
        return z0
    n = max(1, int(math.ceil(abs(tau) / h - 1e-12)))
    f = _field_fn(V.components, V.chart.coords)
    return _rk4(f, z0, tau / n, n)[-1]


def commutativity_check(V, U, tau, lam, z0, h):
    """Gap |phi_tau(psi_lam(z0)) - psi_lam(phi_tau(z0))| and |[V,U](z0)|."""
    if V.chart != U.chart:
        from .errors import ChartMismatch
        raise ChartMismatch("fields live on different charts")
    a = flow_map(V, tau, h, flow_map(U, lam, h, z0))
    b = flow_map(U, lam, h, flow_map(V, tau, h, z0))
    L = lie_bracket(V, U)
    bn = np.array(compile_exprs(L.components, V.chart.coords)(*[float(v) for v in z0]))
    return {"gap": float(np.linalg.norm(a - b)), "bracket_norm": float(np.linalg.norm(bn))}
