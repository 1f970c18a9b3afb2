"""Problem files: YAML documents describing one system.

Schema (all keys except ``chart`` and ``structure`` optional)::

    name: so3_precession
    chart:
      coordinates: [z1, z2, z3]
      parameters: {b: 1}            # substituted at load time
    structure:                       # exactly one of
      canonical: {pairs: 1}
      lie_poisson: {constants: levi_civita}      # or [[i, j, k, value], ...] (1-based)
      explicit: {entries: {"(1,2)": "z3"}}       # 1-based indices or coordinate names
      prescribed: {casimirs: [...], solved: [z1], base: {entries: {"(1,2)": "1"}}}
    hamiltonian: "b*z3"
    constraints: ["q1", {expr: "p1", origin: primary}]
    parametrization: {solved: [x3], f: {x3: "sqrt(1-x1^2-x2^2)"}}
    integrator: {z0: [1, 0, 0], tau_end: 20, h: 0.001, order: 8, mode: poisson}
    casimirs: ["z1^2+z2^2+z3^2"]
    first_integrals: []
"""

import re
from fractions import Fraction

import yaml

from ..dirac import ConstraintSet, Parametrization
from ..errors import InputError, ParseError
from ..reduction import prescribe_casimirs
from ..structures import Chart, PoissonStructure, canonical, lie_poisson, so3_constants
from ..symcore import normalize, parse, substitute, to_text

STRUCTURE_KINDS = ("canonical", "lie_poisson", "explicit", "prescribed")
MODES = ("poisson", "dirac", "multiplier", "series")
_KEYS = {"name", "chart", "structure", "hamiltonian", "constraints", "parametrization",
         "integrator", "casimirs", "first_integrals", "notes"}


class ProblemError(InputError):
    def __init__(self, source, where, message):
        self.source = source
        self.where = where
        super().__init__(f"{source}: {where}: {message}")


class Problem:
    """Validated problem file with every expression parsed over the chart."""

    def __init__(self, data, source="<problem>", settings=None):
        self.source = source
        self.data = data
        self.settings = settings
        if not isinstance(data, dict):
            self._err("top level", "expected a mapping")
        unknown = set(data) - _KEYS
        if unknown:
            self._err("top level", f"unknown keys {sorted(unknown)}")
        self.name = str(data.get("name", "problem"))
        self._read_chart(data.get("chart"))
        self.structure_spec = data.get("structure")
        if not isinstance(self.structure_spec, dict) or len(self.structure_spec) != 1 \
                or next(iter(self.structure_spec)) not in STRUCTURE_KINDS:
            self._err("structure", f"expected exactly one of {', '.join(STRUCTURE_KINDS)}")
        self.structure_kind = next(iter(self.structure_spec))
        self._structure = None
        self.hamiltonian = self._expr(data["hamiltonian"], "hamiltonian") if "hamiltonian" in data else None
        self.constraints, self.origins = [], []
        for k, c in enumerate(data.get("constraints") or []):
            if isinstance(c, dict):
                expr, origin = c.get("expr"), str(c.get("origin", "primary"))
            else:
                expr, origin = c, "primary"
            self.constraints.append(self._expr(expr, f"constraints[{k}]"))
            self.origins.append(origin)
        self.parametrization = None
        pz = data.get("parametrization")
        if pz is not None:
            if not isinstance(pz, dict) or "solved" not in pz or "f" not in pz:
                self._err("parametrization", "needs 'solved' and 'f'")
            solved = [str(s) for s in pz["solved"]]
            for s in solved:
                if s not in self.coords:
                    self._err("parametrization.solved", f"{s!r} is not a chart coordinate")
            f = pz["f"]
            if isinstance(f, dict):
                missing = [s for s in solved if s not in f]
                if missing or set(f) - set(solved):
                    self._err("parametrization.f", "keys must match the solved coordinates")
                f = [f[s] for s in solved]
            if len(f) != len(solved):
                self._err("parametrization.f", "one expression per solved coordinate")
            self.parametrization = (solved, [self._expr(e, f"parametrization.f[{s}]") for s, e in zip(solved, f)])
        self.casimirs = [self._expr(e, f"casimirs[{k}]") for k, e in enumerate(data.get("casimirs") or [])]
        self.first_integrals = [self._expr(e, f"first_integrals[{k}]")
                                for k, e in enumerate(data.get("first_integrals") or [])]
        self.integrator = self._read_integrator(data.get("integrator"))

    # helpers ---------------------------------------------------------------
    def _err(self, where, message):
        raise ProblemError(self.source, where, message)

    def _read_chart(self, ch):
        if not isinstance(ch, dict) or "coordinates" not in ch:
            self._err("chart", "needs a 'coordinates' list")
        coords = ch["coordinates"]
        if not isinstance(coords, list) or not coords:
            self._err("chart.coordinates", "expected a non-empty list")
        coords = [str(c) for c in coords]
        ident = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
        for c in coords:
            if not ident.match(c):
                self._err("chart.coordinates", f"invalid coordinate name {c!r}")
        params = ch.get("parameters") or {}
        if not isinstance(params, dict):
            self._err("chart.parameters", "expected a mapping name -> value")
        self.params = {}
        for k, v in params.items():
            if not ident.match(str(k)):
                self._err("chart.parameters", f"invalid parameter name {k!r}")
            try:
                self.params[str(k)] = Fraction(str(v))
            except (ValueError, ZeroDivisionError):
                self._err(f"chart.parameters.{k}", f"expected a number, got {v!r}")
        try:
            self.chart = Chart(coords, name=str(ch.get("name", "chart")))
        except InputError as e:
            self._err("chart", str(e))
        self.coords = tuple(coords)

    def _expr(self, text, where, coords=None):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = str(text)
        if not isinstance(text, str):
            self._err(where, f"expected an expression string, got {text!r}")
        try:
            e = parse(text, coords if coords is not None else self.coords, tuple(self.params))
        except ParseError as err:
            self._err(where, str(err))
        if self.params:
            e = substitute(e, self.params)
        return e

    def _index(self, tok, where, coords):
        tok = tok.strip()
        if tok.isdigit():
            i = int(tok) - 1
            if not 0 <= i < len(coords):
                self._err(where, f"index {tok} out of range")
            return i
        if tok in coords:
            return coords.index(tok)
        self._err(where, f"unknown coordinate {tok!r}")

    def _entries(self, spec, where, coords):
        if not isinstance(spec, dict):
            self._err(where, "expected a mapping \"(i,j)\" -> expression")
        out = {}
        for key, val in spec.items():
            m = re.fullmatch(r"\s*\(?\s*([^,()]+)\s*,\s*([^,()]+)\s*\)?\s*", str(key))
            if not m:
                self._err(where, f"bad entry key {key!r}")
            i = self._index(m.group(1), f"{where}[{key}]", coords)
            j = self._index(m.group(2), f"{where}[{key}]", coords)
            if not i < j:
                self._err(f"{where}[{key}]", "explicit entries are given for i < j only")
            out[(i, j)] = self._expr(val, f"{where}[{key}]", coords)
        return out

    def _read_integrator(self, spec):
        if spec is None:
            return None
        if not isinstance(spec, dict):
            self._err("integrator", "expected a mapping")
        out = {}
        z0 = spec.get("z0")
        if z0 is not None:
            if not isinstance(z0, list) or len(z0) != len(self.coords):
                self._err("integrator.z0", f"expected {len(self.coords)} numbers")
            try:
                out["z0"] = [float(Fraction(str(v))) if not isinstance(v, float) else v for v in z0]
            except (ValueError, ZeroDivisionError):
                self._err("integrator.z0", "expected numbers")
        for key, conv in (("tau_end", float), ("h", float), ("order", int)):
            if key in spec:
                try:
                    out[key] = conv(spec[key])
                except (TypeError, ValueError):
                    self._err(f"integrator.{key}", f"bad value {spec[key]!r}")
        mode = spec.get("mode", "poisson")
        if mode not in MODES:
            self._err("integrator.mode", f"expected one of {', '.join(MODES)}")
        out["mode"] = mode
        return out

    # built objects -----------------------------------------------------------
    def structure(self):
        if self._structure is None:
            self._structure = self._build_structure()
        return self._structure

    def _build_structure(self):
        kind, spec = self.structure_kind, self.structure_spec[self.structure_kind]
        s = self.settings
        spec = spec or {}
        if kind == "canonical":
            pairs = spec.get("pairs")
            if not isinstance(pairs, int) or 2 * pairs != len(self.coords):
                self._err("structure.canonical.pairs", f"must equal half the chart dimension ({len(self.coords)})")
            return canonical(pairs, self.coords, s)
        if kind == "lie_poisson":
            n = len(self.coords)
            consts = spec.get("constants")
            if consts == "levi_civita":
                if n != 3:
                    self._err("structure.lie_poisson", "levi_civita needs a 3-dimensional chart")
                c = so3_constants()
            else:
                if not isinstance(consts, list):
                    self._err("structure.lie_poisson.constants", "expected 'levi_civita' or a list")
                c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
                for item in consts:
                    if not (isinstance(item, list) and len(item) == 4):
                        self._err("structure.lie_poisson.constants", f"bad item {item!r}")
                    i, j, k, v = item
                    try:
                        c[int(i) - 1][int(j) - 1][int(k) - 1] = Fraction(str(v))
                    except (ValueError, IndexError):
                        self._err("structure.lie_poisson.constants", f"bad item {item!r}")
            return lie_poisson(c, self.coords, s)
        if kind == "explicit":
            entries = self._entries(spec.get("entries") or {}, "structure.explicit.entries", self.coords)
            return PoissonStructure(self.chart, entries, "explicit", s)
        return self.prescribed().structure

    def prescribed(self):
        if self.structure_kind != "prescribed":
            self._err("structure", "not a prescribed structure")
        spec = self.structure_spec["prescribed"] or {}
        cas = [self._expr(e, f"structure.prescribed.casimirs[{k}]")
               for k, e in enumerate(spec.get("casimirs") or [])]
        solved = [str(x) for x in spec.get("solved") or []]
        if len(solved) != len(cas) or not set(solved) <= set(self.coords):
            self._err("structure.prescribed.solved", "one chart coordinate per Casimir")
        kept = [c for c in self.coords if c not in solved]
        knames = [f"K{b + 1}" for b in range(len(cas))]
        base = (spec.get("base") or {}).get("entries") or {}
        saved = self.params
        self.params = dict(saved)
        entries = {}
        try:
            for key, val in base.items():
                m = re.fullmatch(r"\s*\(?\s*([^,()]+)\s*,\s*([^,()]+)\s*\)?\s*", str(key))
                if not m:
                    self._err("structure.prescribed.base", f"bad entry key {key!r}")
                i = self._index(m.group(1), "structure.prescribed.base", kept)
                j = self._index(m.group(2), "structure.prescribed.base", kept)
                if not i < j:
                    self._err("structure.prescribed.base", "entries are given for i < j only")
                entries[(i, j)] = self._expr(val, f"structure.prescribed.base[{key}]", list(kept) + knames)
        finally:
            self.params = saved
        try:
            W0 = PoissonStructure(Chart(kept, name="base"), entries, "explicit", self.settings)
        except InputError as e:
            self._err("structure.prescribed.base", str(e))
        if not hasattr(self, "_prescribed"):
            self._prescribed = prescribe_casimirs(self.chart, cas, solved, W0, self.settings)
        return self._prescribed

    def constraint_set(self, check=True):
        return ConstraintSet(self.chart, self.constraints, self._param(), self.origins,
                             self.settings, check=check)

    def _param(self):
        if self.parametrization is None:
            return None
        return Parametrization(self.chart, self.parametrization[0], self.parametrization[1], self.settings)


def load(path, settings=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise InputError(f"{path}: cannot read problem file ({e.strerror})") from None
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "?"
        raise InputError(f"{path}: {where}: invalid YAML") from None
    return Problem(data, str(path), settings)


def loads(text, source="<string>", settings=None):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError:
        raise InputError(f"{source}: invalid YAML") from None
    return Problem(data, source, settings)


def explicit_document(name, coords, structure, hamiltonian=None, casimirs=(), first_integrals=(),
                      integrator=None, notes=None):
    """Problem-file dictionary with an explicit structure."""
    entries = {f"({i + 1},{j + 1})": to_text(e) for (i, j), e in sorted(structure.upper().items())}
    doc = {"name": name, "chart": {"coordinates": list(coords)},
           "structure": {"explicit": {"entries": entries}}}
    if hamiltonian is not None:
        doc["hamiltonian"] = to_text(normalize(hamiltonian))
    if casimirs:
        doc["casimirs"] = [to_text(e) for e in casimirs]
    if first_integrals:
        doc["first_integrals"] = [to_text(e) for e in first_integrals]
    if integrator:
        doc["integrator"] = integrator
    if notes:
        doc["notes"] = notes
    return doc


def dump(doc):
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=1000)
