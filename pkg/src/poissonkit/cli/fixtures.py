"""Expected-report fixtures for the bundled corpus.

``python -m poissonkit.cli.fixtures`` rewrites every fixture from the
current implementation; the test suite compares against them byte for byte.
"""

import io

from . import CORPUS
from .main import run

EXPECTED = CORPUS / "expected"

# (problem, command, extra flags)
RUNS = [
    ("canonical", "check", []),
    ("canonical", "integrate", []),
    ("so3_precession", "check", []),
    ("so3_precession", "integrate", []),
    ("so3_casimir", "check", []),
    ("so3_casimir", "reduce", []),
    ("so3_dirac", "dirac", []),
    ("broken_jacobi", "check", []),
    ("chain", "consistency", []),
    ("contradiction", "consistency", []),
    ("qp_elimination", "dirac", []),
    ("qp_elimination", "reduce", []),
    ("sphere", "dirac", []),
    ("sphere", "reduce", []),
    ("example71", "prescribe", []),
    ("example71", "reduce", []),
    ("example72", "prescribe", []),
]


def fixture_path(problem, command):
    return EXPECTED / f"{problem}.{command}.json"


def render(problem, command, flags=()):
    """(exit code, machine report text) for one bundled run."""
    buf = io.StringIO()
    code, _ = run([command, str(CORPUS / f"{problem}.yaml"), "--report-format", "machine", *flags],
                  stdout=buf)
    return code, buf.getvalue()


def regenerate():
    EXPECTED.mkdir(exist_ok=True)
    for problem, command, flags in RUNS:
        code, text = render(problem, command, flags)
        fixture_path(problem, command).write_text(text, encoding="utf-8")
        print(f"{problem}.{command}: exit {code}")


if __name__ == "__main__":
    regenerate()
