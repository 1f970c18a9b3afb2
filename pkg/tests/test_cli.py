import io
import json

import pytest

from poissonkit.cli import CORPUS, corpus_path
from poissonkit.cli.fixtures import RUNS, fixture_path, render
from poissonkit.cli.main import run
from poissonkit.cli.problem import loads


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code, rep = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _write(tmp_path, text, name="p.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize("problem,command,flags", RUNS, ids=[f"{p}.{c}" for p, c, _ in RUNS])
def test_fixture_bytes(problem, command, flags):
    code, text = render(problem, command, flags)
    assert text == fixture_path(problem, command).read_text(encoding="utf-8")
    assert code == (0 if json.loads(text)["passed"] else 1)


def test_reports_are_byte_stable():
    a = _run("check", str(corpus_path("so3_precession")), "--report-format", "machine")
    b = _run("check", str(corpus_path("so3_precession")), "--report-format", "machine")
    assert a == b


def test_global_flags_either_side():
    p = str(corpus_path("canonical"))
    a = _run("--seed", "7", "--samples", "20", "check", p, "--report-format", "machine")
    b = _run("check", p, "--seed", "7", "--samples", "20", "--report-format", "machine")
    assert a == b and a[0] == 0


def test_exit_codes(tmp_path):
    assert _run("check", str(corpus_path("broken_jacobi")))[0] == 1
    assert _run("consistency", str(corpus_path("contradiction")))[0] == 1
    # input errors
    assert _run("check", str(tmp_path / "missing.yaml"))[0] == 2
    assert _run("dirac", str(corpus_path("chain")))[0] == 2          # odd constraint count
    assert _run("reduce", str(corpus_path("chain")))[0] == 2         # no parametrization
    assert _run("prescribe", str(corpus_path("canonical")))[0] == 2
    assert _run("bogus")[0] == 2
    bad = _write(tmp_path, "chart: {coordinates: [q, p]}\nstructure: {canonical: {pairs: 1}}\n"
                           "hamiltonian: 'q^'\n")
    code, _, err = _run("check", bad)
    assert code == 2 and "hamiltonian" in err
    # numeric abort
    ab = _write(tmp_path, "chart: {coordinates: [q, p]}\nstructure: {canonical: {pairs: 1}}\n"
                          "hamiltonian: 'p^2/2 + sqrt(q)'\n"
                          "integrator: {z0: [0.01, -1], tau_end: 1, h: 0.01, mode: poisson}\n",
                "abort.yaml")
    assert _run("integrate", ab)[0] == 3


def test_degenerate_delta_reports_det(tmp_path):
    p = _write(tmp_path, "chart: {coordinates: [q1, q2, p1, p2]}\nstructure: {canonical: {pairs: 2}}\n"
                         "constraints: [q1, q2]\n")
    code, out, _ = _run("dirac", p, "--report-format", "machine")
    assert code == 1
    assert "det" in json.loads(out)["results"]["error"].lower()


@pytest.mark.parametrize("problem,command", [
    ("sphere", "dirac"), ("qp_elimination", "dirac"), ("so3_casimir", "reduce"),
    ("example71", "reduce"), ("example71", "prescribe"), ("example72", "prescribe"),
])
def test_emitted_files_round_trip(tmp_path, problem, command):
    out = tmp_path / "emitted.yaml"
    assert _run(command, str(corpus_path(problem)), "--out", str(out))[0] == 0
    assert _run("check", str(out))[0] == 0


def test_emitted_reduction_is_canonical_pair(tmp_path):
    out = tmp_path / "r.yaml"
    _run("reduce", str(corpus_path("example71")), "--out", str(out))
    prob = loads(out.read_text())
    P = prob.structure()
    assert P.chart.coords == ("z2", "z3")
    assert str(P.entry(0, 1)) == "1"


def test_consistency_emits_secondary(tmp_path):
    out = tmp_path / "c.yaml"
    assert _run("consistency", str(corpus_path("chain")), "--out", str(out))[0] == 0
    prob = loads(out.read_text())
    assert [str(c) for c in prob.constraints] == ["q", "p"]
    assert _run("dirac", str(out))[0] == 0


def test_integrate_csv(tmp_path):
    out = tmp_path / "t.csv"
    code, text, _ = _run("integrate", str(corpus_path("so3_precession")), "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "tau,z1,z2,z3,H,K1"
    assert len(lines) == 20001 + 1


def test_series_mode_order_zero(tmp_path):
    p = _write(tmp_path, "chart: {coordinates: [q, p]}\nstructure: {canonical: {pairs: 1}}\n"
                         "hamiltonian: '(q^2+p^2)/2'\n"
                         "integrator: {z0: [0.3, 0.4], tau_end: 0.1, h: 0.01, order: 0, mode: series}\n")
    code, out, _ = _run("integrate", p, "--report-format", "machine")
    assert code == 0 and json.loads(out)["results"]["point"] == [0.3, 0.4]


def test_text_report_ends_with_overall():
    _, out, _ = _run("check", str(corpus_path("canonical")))
    assert out.splitlines()[-1] == "OVERALL: PASS"


def test_corpus_contents():
    names = {p.stem for p in CORPUS.glob("*.yaml")}
    assert {"canonical", "so3_precession", "sphere", "example71", "contradiction"} <= names
    with pytest.raises(FileNotFoundError):
        corpus_path("nope")
