"""Command-line front end.

Exit codes: 0 all mandatory checks pass, 1 verification failure,
2 input error, 3 numeric abort.
"""

import argparse
import sys
import time

import numpy as np

from .. import dirac as dm
from .. import dynamics as dy
from .. import reduction as rd
from ..errors import (DegenerateStructure, DimensionTooLarge, InputError, NumericAbort,
                      PoissonKitError, VerificationError)
from ..settings import Settings
from ..structures import bracket, casimir_check
from ..symcore import is_zero, normalize, to_text
from ..symplectic import invert
from . import problem as pf
from .report import Report

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

ANCHORS = {
    "antisymmetry": "antisymmetry of the Poisson tensor",
    "jacobi": "Jacobi identity of the Poisson tensor",
    "casimir": "Casimir condition omega^{ij} d_j K = 0",
    "first_integral": "first integral condition {Q,H} = 0",
    "chain": "Dirac consistency procedure for secondary constraints",
    "second_class": "second-class condition det{Phi,Phi} != 0",
    "dirac_casimir": "constraints are Casimirs of the Dirac bracket",
    "dirac_jacobi": "Jacobi identity of the Dirac tensor",
    "induced": "induced bracket on a Casimir surface",
    "tangency": "tangency identity omega^{i alpha} = omega^{ib} d_b f^alpha",
    "submanifold": "parent bracket restricted equals induced bracket",
    "closure": "pullback-then-invert equals Dirac-then-restrict",
    "prescribed": "prescribed functions are Casimirs",
    "block": "block form of the prescribed tensor",
    "closed_form": "three-dimensional closed form eps^{ijk} d_k K / d_s K",
    "multiplier": "multiplier equations {Phi,H0} + Delta lambda = 0",
}


def _strs(exprs):
    return [to_text(e) for e in exprs]


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# commands -----------------------------------------------------------------------

def cmd_check(prob, args, rep):
    P = prob.structure()
    rep.add("antisymmetry", ANCHORS["antisymmetry"], True, structural=True)
    jac = P.jacobi()
    rep.add("jacobi", ANCHORS["jacobi"], jac.verdict)
    rep.results["dimension"] = P.dim
    rep.results["provenance"] = P.provenance
    for b, K in enumerate(prob.casimirs):
        rep.add(f"casimir K{b + 1}", ANCHORS["casimir"], casimir_check(P, K, prob.settings),
                function=to_text(K))
    if prob.first_integrals:
        if prob.hamiltonian is None:
            raise InputError(f"{prob.source}: first_integrals need a hamiltonian")
        for b, Q in enumerate(prob.first_integrals):
            v = is_zero(bracket(P, Q, prob.hamiltonian), prob.settings.tol, prob.settings.samples,
                        prob.settings.seed, label=f"{{Q{b + 1},H}}")
            rep.add(f"first integral Q{b + 1}", ANCHORS["first_integral"], v, function=to_text(Q))


def cmd_consistency(prob, args, rep):
    if not prob.constraints:
        raise InputError(f"{prob.source}: consistency needs constraints")
    if prob.hamiltonian is None:
        raise InputError(f"{prob.source}: consistency needs a hamiltonian")
    P = prob.structure()
    C = prob.constraint_set()
    res = dm.consistency_chain(P, prob.hamiltonian, C, max_steps=args.max_steps, settings=prob.settings)
    rep.results["status"] = res.status
    rep.results["constraints"] = [{"expr": to_text(e), "origin": o}
                                  for e, o in zip(res.constraints.exprs, res.constraints.origins)]
    rep.results["steps"] = [s.to_dict() for s in res.steps]
    rep.add("chain", ANCHORS["chain"], res.status == "terminated",
            outcome=res.status, **({"witness": to_text(res.witness)} if res.witness is not None else {}))
    if res.status == "terminated" and len(res.constraints) % 2 == 0 and len(res.constraints):
        on_surface = res.constraints.parametrization is not None
        sc = dm.second_class_check(P, res.constraints, on_surface, prob.settings)
        rep.expect_nonzero("second class", ANCHORS["second_class"], sc.verdict, mandatory=False,
                           det=to_text(sc.det), on_surface=on_surface)
    if args.out:
        doc = dict(prob.data)
        doc["constraints"] = rep.results["constraints"]
        if len(res.constraints) != len(C) and "parametrization" in doc:
            doc.pop("parametrization")
        _write(args.out, pf.dump(doc))
        rep.results["emitted"] = args.out


def cmd_dirac(prob, args, rep):
    P = prob.structure()
    C = prob.constraint_set()
    D = dm.dirac_bracket(P, C, prob.settings)
    rep.add("constraints are Casimirs", ANCHORS["dirac_casimir"], D.report["casimir"])
    rep.add("jacobi", ANCHORS["dirac_jacobi"], D.report["jacobi"])
    rep.results["delta"] = [_strs(r) for r in D.delta]
    rep.results["det_delta"] = to_text(D.det)
    rep.results["entries"] = {f"{{{P.chart.coords[i]},{P.chart.coords[j]}}}": to_text(e)
                              for (i, j), e in sorted(D.structure.upper().items())}
    if args.out:
        doc = pf.explicit_document(f"{prob.name}_dirac", P.chart.coords, D.structure, prob.hamiltonian,
                                   casimirs=C.exprs, integrator=prob.data.get("integrator"))
        _write(args.out, pf.dump(doc))
        rep.results["emitted"] = args.out


def cmd_reduce(prob, args, rep):
    P = prob.structure()
    if prob.parametrization is None:
        raise InputError(f"{prob.source}: reduce needs a parametrization")
    C = prob.constraint_set()
    route = args.route
    if route == "auto":
        route = "casimir" if all(casimir_check(P, k, prob.settings).is_zero for k in C) else "dirac"
    rep.results["route"] = route
    if route == "casimir":
        S = rd.induced_bracket(P, C, prob.settings)
        for b in range(len(C)):
            rep.add(f"casimir K{b + 1}", ANCHORS["casimir"], S.report[f"casimir K{b + 1}"])
    else:
        D = dm.dirac_bracket(P, C, prob.settings)
        rep.add("constraints are Casimirs of the Dirac bracket", ANCHORS["dirac_casimir"], D.report["casimir"])
        S = rd.induced_bracket(D.structure, C, prob.settings)
        try:
            invert(P, prob.settings)
            nondegenerate = True
        except (DegenerateStructure, DimensionTooLarge):
            nondegenerate = False
        if nondegenerate:
            cl = rd.diagram_closure_check(P, C, prob.settings)
            rep.add("diagram closure", ANCHORS["closure"], cl["passed"], numeric=True,
                    max_abs=cl["max_abs"], points=cl["points"])
    rep.add("jacobi", ANCHORS["jacobi"], S.report["jacobi"])
    rep.add("tangency identity", ANCHORS["tangency"], S.report["tangency identity"])
    parent = P if route == "casimir" else S.parent
    rep.add("restricted brackets", ANCHORS["submanifold"], rd.poisson_submanifold_check(parent, S, settings=prob.settings))
    sub = S.chart
    rep.results["coordinates"] = list(sub.coords)
    rep.results["entries"] = {f"{{{sub.coords[i]},{sub.coords[j]}}}": to_text(e)
                              for (i, j), e in sorted(S.structure.upper().items())}
    Hh = None
    if prob.hamiltonian is not None:
        Hh = S.parametrization.restrict(prob.hamiltonian)
        rep.results["reduced_hamiltonian"] = to_text(Hh)
    if args.out:
        doc = pf.explicit_document(f"{prob.name}_reduced", sub.coords, S.structure, Hh)
        _write(args.out, pf.dump(doc))
        rep.results["emitted"] = args.out


def cmd_prescribe(prob, args, rep):
    if prob.structure_kind != "prescribed":
        raise InputError(f"{prob.source}: prescribe needs a 'prescribed' structure block")
    pr = prob.prescribed()
    P = pr.structure
    rep.add("jacobi", ANCHORS["jacobi"], pr.report["jacobi"])
    for k, v in pr.report.items():
        if k.startswith("casimir"):
            rep.add(k, ANCHORS["prescribed"], v)
    rep.add("block structure", ANCHORS["block"], pr.report["block structure"])
    if "closed form" in pr.report:
        rep.add("closed form", ANCHORS["closed_form"], pr.report["closed form"])
        rep.results["closed_form"] = {f"{{{P.chart.coords[i]},{P.chart.coords[j]}}}": to_text(pr.closed_form[i][j])
                                      for i in range(3) for j in range(i + 1, 3)}
    rep.results["entries"] = {f"{{{P.chart.coords[i]},{P.chart.coords[j]}}}": to_text(e)
                              for (i, j), e in sorted(P.upper().items())}
    if args.out:
        cas = [normalize(k) for k in _prescribed_casimirs(prob)]
        doc = pf.explicit_document(f"{prob.name}_prescribed", P.chart.coords, P, prob.hamiltonian, casimirs=cas)
        _write(args.out, pf.dump(doc))
        rep.results["emitted"] = args.out


def _prescribed_casimirs(prob):
    spec = prob.structure_spec["prescribed"]
    return [prob._expr(e, "structure.prescribed.casimirs") for e in spec.get("casimirs") or []]


def cmd_integrate(prob, args, rep):
    integ = prob.integrator
    if integ is None or "z0" not in integ or "tau_end" not in integ:
        raise InputError(f"{prob.source}: integrate needs an integrator block with z0 and tau_end")
    if prob.hamiltonian is None:
        raise InputError(f"{prob.source}: integrate needs a hamiltonian")
    P = prob.structure()
    mode = args.mode or integ["mode"]
    h = integ.get("h", 1e-3)
    z0, tau = integ["z0"], integ["tau_end"]
    H = prob.hamiltonian
    rep.results["mode"] = mode
    if mode == "series":
        order = integ.get("order", 4)
        s = dy.series_solution(P, H, z0, tau, order)
        ref = dy.integrate(P, H, z0, tau, h).final
        rep.results["order"] = order
        rep.results["point"] = [float(v) for v in s.point]
        rep.results["rk4_reference"] = [float(v) for v in ref]
        rep.results["gap"] = float(np.max(np.abs(np.asarray(s.point) - ref)))
        if s.transcendental:
            rep.results["note"] = "hamiltonian contains transcendental atoms"
        return
    if mode == "poisson":
        tr = dy.integrate(P, H, z0, tau, h, casimirs=prob.casimirs, constraints=prob.constraints)
    elif mode == "dirac":
        tr = dy.integrate_dirac(P, H, prob.constraint_set(), z0, tau, h, casimirs=prob.casimirs)
    else:
        tr = dy.integrate_multiplier(P, H, prob.constraint_set(), z0, tau, h, casimirs=prob.casimirs)
        r = tr.metadata["lambda_residual_max"]
        rep.add("multiplier residual", ANCHORS["multiplier"], r <= 1e-8, numeric=True, max_abs=r)
    drifts = {}
    for name in tr.monitors:
        if name.startswith("Phi") or name.startswith("lambda"):
            drifts[name] = {"max_abs": tr.max_abs(name)}
        else:
            drifts[name] = {"drift": tr.drift(name)}
    rep.results["steps"] = len(tr) - 1
    rep.results["h"] = h
    rep.results["final_state"] = [float(v) for v in tr.final]
    rep.results["monitors"] = drifts
    if args.out:
        _write(args.out, tr.to_csv())
        rep.results["emitted"] = args.out


COMMANDS = {
    "check": cmd_check,
    "consistency": cmd_consistency,
    "dirac": cmd_dirac,
    "reduce": cmd_reduce,
    "prescribe": cmd_prescribe,
    "integrate": cmd_integrate,
}


def _global_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="seed for randomized checks (default 0)")
    p.add_argument("--tol", type=float, default=d(1e-9), help="zero-test tolerance (default 1e-9)")
    p.add_argument("--samples", type=int, default=d(50), help="sample points per zero test (default 50)")
    p.add_argument("--out", default=d(None), help="output path for emitted files or CSV")
    p.add_argument("--report-format", choices=("text", "machine"), default=d("text"))
    p.add_argument("--timing", action="store_true", default=d(False),
                   help="include wall-clock time (reports are then not byte-stable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="poissonkit", description=__doc__.splitlines()[0])
    _global_flags(parser, False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("problem")
        _global_flags(sp, True)
        if name == "consistency":
            sp.add_argument("--max-steps", type=int, default=10)
        if name == "reduce":
            sp.add_argument("--route", choices=("auto", "casimir", "dirac"), default="auto")
        if name == "integrate":
            sp.add_argument("--mode", choices=pf.MODES, default=None)
    return parser


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI; returns (exit_code, report or None)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (EXIT_INPUT if e.code else EXIT_OK), None
    if args.tol <= 0 or args.samples < 1:
        print("error: --tol must be positive and --samples at least 1", file=stderr)
        return EXIT_INPUT, None
    settings = Settings(tol=args.tol, samples=args.samples, seed=args.seed)
    rep = None
    t0 = time.perf_counter()
    try:
        prob = pf.load(args.problem, settings)
        rep = Report(args.command, prob.name)
        COMMANDS[args.command](prob, args, rep)
        code = EXIT_OK if rep.passed else EXIT_FAIL
    except InputError as e:
        print(f"input error: {e}", file=stderr)
        return EXIT_INPUT, None
    except NumericAbort as e:
        print(f"numeric abort: {e}", file=stderr)
        return EXIT_NUMERIC, None
    except VerificationError as e:
        if rep is None:
            rep = Report(args.command, args.problem)
        extra = {"error": str(e)}
        if getattr(e, "verdict", None) is not None:
            rep.add(type(e).__name__, "verification failure", e.verdict)
        else:
            rep.add(type(e).__name__, "verification failure", False)
        rep.results.update(extra)
        code = EXIT_FAIL
    except PoissonKitError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_INPUT, None
    if args.timing:
        rep.timing = time.perf_counter() - t0
    stdout.write(rep.machine() if args.report_format == "machine" else rep.text())
    return code, rep


def main(argv=None):
    code, _ = run(argv)
    sys.exit(code)


if __name__ == "__main__":
    main()
