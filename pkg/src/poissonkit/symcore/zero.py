"""Two-tier zero testing.

Exact tier: the normal form is the zero constant.  Numeric tier: evaluation
at seeded pseudo-random points, rejecting points that lie too close to a
pole or outside the domain of ``log``/``sqrt``.
"""

import math

import numpy as np

from ..errors import DomainError, UndecidableError
from .expr import Rational, as_expr
from .normal import normalize
from .numeric import compile_exprs, guards

PROVED_ZERO = "ProvedZero"
NUMERIC_ZERO = "NumericZero"
NON_ZERO = "NonZero"

DEFAULT_TOL = 1e-9
DEFAULT_SAMPLES = 50
DEFAULT_SEED = 0
POLE_GUARD = 1e-8


class ZeroVerdict:
    """Outcome of a zero test.

    ``kind`` is one of ProvedZero, NumericZero, NonZero.  NumericZero records
    the sample count and the largest magnitude seen; NonZero records the
    witness point and the value found there.
    """

    __slots__ = ("kind", "samples", "max_abs", "witness", "value", "label")

    def __init__(self, kind, samples=0, max_abs=0.0, witness=None, value=None, label=None):
        self.kind = kind
        self.samples = samples
        self.max_abs = max_abs
        self.witness = witness
        self.value = value
        self.label = label

    @property
    def is_zero(self):
        return self.kind != NON_ZERO

    @property
    def tier(self):
        return "exact" if self.kind == PROVED_ZERO else "numeric"

    def __bool__(self):
        return self.is_zero

    def __repr__(self):
        if self.kind == PROVED_ZERO:
            return "ZeroVerdict(ProvedZero)"
        if self.kind == NUMERIC_ZERO:
            return f"ZeroVerdict(NumericZero, samples={self.samples}, max_abs={self.max_abs:.3g})"
        return f"ZeroVerdict(NonZero, value={self.value!r}, at={self.witness!r}, label={self.label!r})"

    def to_dict(self):
        d = {"kind": self.kind, "tier": self.tier}
        if self.kind == NUMERIC_ZERO:
            d["samples"] = self.samples
            d["max_abs"] = float(self.max_abs)
        if self.kind == NON_ZERO:
            if self.label is not None:
                d["where"] = self.label
            d["witness"] = {k: float(v) for k, v in sorted((self.witness or {}).items())}
            d["value"] = float(self.value)
        return d


def combine(verdicts):
    """Aggregate: first NonZero wins, else NumericZero if any, else ProvedZero."""
    verdicts = list(verdicts)
    for v in verdicts:
        if v.kind == NON_ZERO:
            return v
    numeric = [v for v in verdicts if v.kind == NUMERIC_ZERO]
    if numeric:
        return ZeroVerdict(NUMERIC_ZERO, samples=max(v.samples for v in numeric),
                           max_abs=max(v.max_abs for v in numeric))
    return ZeroVerdict(PROVED_ZERO)


def _point_ok(guard_fn, values):
    if guard_fn is None:
        return True
    kinds, fn = guard_fn
    try:
        gv = fn(*values)
    except DomainError:
        return False
    for kind, v in zip(kinds, gv):
        if not math.isfinite(v):
            return False
        if kind == "den" and abs(v) < POLE_GUARD:
            return False
        if kind == "log" and v < POLE_GUARD:
            return False
        if kind == "sqrt" and v < 0.0:
            return False
    return True


def box_points(names, samples, seed=DEFAULT_SEED, box=(-2.0, 2.0), exprs=()):
    """Seeded points in ``box^n`` valid for every expression in ``exprs``.

    Up to ``10 * samples`` candidates are drawn.  Raises UndecidableError if
    none survive.
    """
    names = tuple(names)
    rng = np.random.default_rng(seed)
    g = []
    for e in exprs:
        g.extend(guards(e))
    guard_fn = (tuple(k for k, _ in g), compile_exprs(tuple(x for _, x in g), names)) if g else None
    pts = []
    for _ in range(10 * samples):
        values = tuple(float(v) for v in rng.uniform(box[0], box[1], size=len(names)))
        if _point_ok(guard_fn, values):
            pts.append(dict(zip(names, values)))
            if len(pts) == samples:
                break
    if not pts:
        raise UndecidableError("every sample point hit a singularity")
    return pts


def is_zero_all(exprs, tol=DEFAULT_TOL, samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED,
                points=None, labels=None, box=(-2.0, 2.0)):
    """Zero-test a family of expressions on one shared set of sample points."""
    exprs = [normalize(as_expr(e)) for e in exprs]
    labels = list(labels) if labels is not None else [None] * len(exprs)
    pending = [(e, l) for e, l in zip(exprs, labels)
               if not (isinstance(e, Rational) and e.value == 0)]
    if not pending:
        return ZeroVerdict(PROVED_ZERO)
    names = sorted(set().union(*(e.free_symbols for e, _ in pending)))
    if points is None:
        if names:
            points = box_points(names, samples, seed, box, [e for e, _ in pending])
        else:
            points = [{}]
    fn = compile_exprs(tuple(e for e, _ in pending), tuple(names))
    used = 0
    worst = 0.0
    for p in points:
        try:
            values = fn(*(float(p[n]) for n in names))
        except DomainError:
            continue
        if not all(math.isfinite(v) for v in values):
            continue
        used += 1
        for (e, l), v in zip(pending, values):
            if abs(v) > tol:
                return ZeroVerdict(NON_ZERO, samples=used, max_abs=abs(v),
                                   witness={n: p[n] for n in names}, value=v, label=l)
            worst = max(worst, abs(v))
    if used == 0:
        raise UndecidableError("every sample point hit a singularity")
    return ZeroVerdict(NUMERIC_ZERO, samples=used, max_abs=worst)


def is_zero(e, tol=DEFAULT_TOL, samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED, points=None, label=None):
    """Zero-test a single expression (see module docstring)."""
    if tol <= 0 or samples < 1:
        raise ValueError("tol must be positive and samples at least 1")
    return is_zero_all([e], tol, samples, seed, points, [label])
